/*
 * Copyright 2026 The tldr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Subcommand front end. Exit codes: 0 success, 1 usage, 2 data, 3 numerical.

#ifndef TLDR_CLI_HPP_
#define TLDR_CLI_HPP_

#include <iostream>
#include <string>
#include <vector>

namespace tldr {

int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

// Convenience for tests: argv[0] is supplied.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

// Parses "0.1,1,10", "1:100:1" or a comma-separated mix; returns the sorted,
// de-duplicated grid. Ranges include hi when it lies on the step lattice.
std::vector<double> parse_lambda_grid(const std::string& text);

}  // namespace tldr

#endif  // TLDR_CLI_HPP_
