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

#include "tldr/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

namespace tldr {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as little-endian");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

struct NpyHeader {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::int64_t> shape;
  std::size_t data_offset = 0;
};

NpyHeader parse_header(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 10 || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0) {
    throw FormatError(origin + ": missing NPY magic");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t prefix = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    prefix = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError(origin + ": truncated NPY preamble");
    for (int i = 3; i >= 0; --i) {
      header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
    }
    prefix = 12;
  } else {
    throw FormatError(origin + ": unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < prefix + header_len) throw FormatError(origin + ": truncated NPY header");
  const std::string dict = bytes.substr(prefix, header_len);

  NpyHeader h;
  h.data_offset = prefix + header_len;

  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex fortran_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch m;
  if (!std::regex_search(dict, m, descr_re)) throw FormatError(origin + ": header lacks 'descr'");
  h.descr = m[1];
  if (!std::regex_search(dict, m, fortran_re)) {
    throw FormatError(origin + ": header lacks 'fortran_order'");
  }
  h.fortran_order = (m[1] == "True");
  if (!std::regex_search(dict, m, shape_re)) throw FormatError(origin + ": header lacks 'shape'");
  std::stringstream ss(m[1].str());
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item.substr(first), &used);
      if (v < 0) throw FormatError(origin + ": negative dimension");
      h.shape.push_back(v);
    } catch (const std::logic_error&) {
      throw FormatError(origin + ": bad shape entry '" + item + "'");
    }
  }
  return h;
}

std::string format_header(const std::vector<std::int64_t>& shape) {
  std::string shape_str = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) shape_str += ", ";
    shape_str += std::to_string(shape[i]);
  }
  if (shape.size() == 1) shape_str += ",";
  shape_str += ")";
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape_str + ", }";
  // Pad so that magic + version + length + dict + '\n' is a multiple of 64.
  const std::size_t unpadded = 10 + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  std::string out(kMagic, kMagicLen);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(dict.size() & 0xff);
  out += static_cast<char>((dict.size() >> 8) & 0xff);
  out += dict;
  return out;
}

// Copies `count` elements of the payload into `dst` as doubles.
void read_payload(const std::string& bytes, const NpyHeader& h, std::size_t count, double* dst,
                  const std::string& origin) {
  const std::size_t width = h.descr == "<f4" ? 4 : 8;
  const std::size_t need = count * width;
  if (bytes.size() - h.data_offset != need) {
    throw FormatError(origin + ": payload holds " + std::to_string(bytes.size() - h.data_offset) +
                      " bytes, header implies " + std::to_string(need));
  }
  const char* src = bytes.data() + h.data_offset;
  if (width == 8) {
    if (count) std::memcpy(dst, src, need);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, src + 4 * i, 4);
      dst[i] = static_cast<double>(f);
    }
  }
}

void check_descr(const NpyHeader& h, const std::string& origin) {
  if (h.descr != "<f4" && h.descr != "<f8") {
    throw FormatError(origin + ": unsupported dtype '" + h.descr + "' (want <f4 or <f8)");
  }
  if (h.fortran_order) throw ShapeError(origin + ": Fortran-order arrays are not supported");
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::kImageFeatures: return "image-features";
    case Role::kClipImage: return "clip-image";
    case Role::kClipText: return "clip-text";
    case Role::kGap: return "gap";
  }
  return "image-features";
}

Role role_from_string(const std::string& s) {
  if (s == "image-features") return Role::kImageFeatures;
  if (s == "clip-image") return Role::kClipImage;
  if (s == "clip-text") return Role::kClipText;
  if (s == "gap") return Role::kGap;
  throw SchemaError("unknown manifest role '" + s + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

void require_finite(const EmbeddingMatrix& m, const std::string& origin) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        throw DataError(origin + ": non-finite entry at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
    }
  }
}

EmbeddingMatrix decode_npy(const std::string& bytes, const std::string& origin) {
  const NpyHeader h = parse_header(bytes, origin);
  check_descr(h, origin);
  if (h.shape.size() != 2) {
    throw ShapeError(origin + ": expected a 2-D array, got " + std::to_string(h.shape.size()) +
                     "-D");
  }
  EmbeddingMatrix m(h.shape[0], h.shape[1]);
  read_payload(bytes, h, static_cast<std::size_t>(m.size()), m.data(), origin);
  require_finite(m, origin);
  return m;
}

std::string encode_npy(const EmbeddingMatrix& m) {
  std::string out = format_header({m.rows(), m.cols()});
  const std::size_t n = static_cast<std::size_t>(m.size()) * sizeof(double);
  const std::size_t off = out.size();
  out.resize(off + n);
  if (n) std::memcpy(out.data() + off, m.data(), n);
  return out;
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path) {
  return decode_npy(read_file(path), path.string());
}

void save_matrix(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_file(path, encode_npy(m));
}

VectorXr load_vector(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string origin = path.string();
  const NpyHeader h = parse_header(bytes, origin);
  check_descr(h, origin);
  std::int64_t n = 0;
  if (h.shape.size() == 1) {
    n = h.shape[0];
  } else if (h.shape.size() == 2 && (h.shape[0] == 1 || h.shape[1] == 1)) {
    n = h.shape[0] * h.shape[1];
  } else {
    throw ShapeError(origin + ": expected a vector");
  }
  VectorXr v(n);
  read_payload(bytes, h, static_cast<std::size_t>(n), v.data(), origin);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw DataError(origin + ": non-finite entry " + std::to_string(i));
  }
  return v;
}

void save_vector(const VectorXr& v, const std::filesystem::path& path) {
  std::string out = format_header({v.size()});
  const std::size_t n = static_cast<std::size_t>(v.size()) * sizeof(double);
  const std::size_t off = out.size();
  out.resize(off + n);
  if (n) std::memcpy(out.data() + off, v.data(), n);
  write_file(path, out);
}

Manifest parse_manifest(const std::string& json_text, const std::string& origin) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(origin + ": " + e.what());
  }
  Manifest man;
  try {
    man.count = j.at("count").get<std::int64_t>();
    man.dim = j.at("dim").get<std::int64_t>();
    man.role = role_from_string(j.at("role").get<std::string>());
    man.ids = j.at("ids").get<std::vector<std::string>>();
    if (j.contains("labels") && !j["labels"].is_null()) {
      man.labels = j["labels"].get<std::vector<int>>();
    }
    if (j.contains("groups") && !j["groups"].is_null()) {
      std::vector<Group> groups;
      for (const auto& g : j["groups"]) {
        if (!g.is_array() || g.size() != 2) throw SchemaError(origin + ": group must be [y, a]");
        groups.push_back({g[0].get<int>(), g[1].get<int>()});
      }
      man.groups = std::move(groups);
    }
    if (j.contains("num_classes") && !j["num_classes"].is_null()) {
      man.num_classes = j["num_classes"].get<int>();
    }
    if (j.contains("num_attributes") && !j["num_attributes"].is_null()) {
      man.num_attributes = j["num_attributes"].get<int>();
    }
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }

  if (man.count < 0 || man.dim < 0) throw SchemaError(origin + ": negative count or dim");
  auto check_len = [&](std::size_t n, const char* what) {
    if (static_cast<std::int64_t>(n) != man.count) {
      throw PairingError(origin + ": " + what + " has " + std::to_string(n) +
                         " entries but count is " + std::to_string(man.count));
    }
  };
  check_len(man.ids.size(), "ids");
  if (man.labels) {
    check_len(man.labels->size(), "labels");
    for (int y : *man.labels) {
      if (y < 0 || (man.num_classes && y >= *man.num_classes)) {
        throw SchemaError(origin + ": label " + std::to_string(y) + " out of range");
      }
    }
  }
  if (man.groups) {
    check_len(man.groups->size(), "groups");
    for (const Group& g : *man.groups) {
      const bool bad_y = g.y < 0 || (man.num_classes && g.y >= *man.num_classes);
      const bool bad_a = g.a < 0 || (man.num_attributes && g.a >= *man.num_attributes);
      if (bad_y || bad_a) {
        throw SchemaError(origin + ": group (" + std::to_string(g.y) + "," + std::to_string(g.a) +
                          ") outside declared |Y|, |A|");
      }
    }
    if (man.labels) {
      for (std::size_t i = 0; i < man.groups->size(); ++i) {
        if ((*man.groups)[i].y != (*man.labels)[i]) {
          throw SchemaError(origin + ": group class disagrees with label at row " +
                            std::to_string(i));
        }
      }
    }
  }
  return man;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

std::string manifest_to_json(const Manifest& man) {
  nlohmann::ordered_json j;
  j["count"] = man.count;
  j["dim"] = man.dim;
  j["role"] = to_string(man.role);
  j["ids"] = man.ids;
  if (man.labels) j["labels"] = *man.labels;
  if (man.groups) {
    auto arr = nlohmann::ordered_json::array();
    for (const Group& g : *man.groups) arr.push_back({g.y, g.a});
    j["groups"] = arr;
  }
  if (man.num_classes) j["num_classes"] = *man.num_classes;
  if (man.num_attributes) j["num_attributes"] = *man.num_attributes;
  return j.dump(1) + "\n";
}

void save_manifest(const Manifest& man, const std::filesystem::path& path) {
  write_file(path, manifest_to_json(man));
}

void validate_pairing(const EmbeddingMatrix& m, const Manifest& man,
                      const std::string& matrix_name, const std::string& manifest_name) {
  if (man.count != m.rows() || man.dim != m.cols()) {
    throw PairingError(manifest_name + " declares " + std::to_string(man.count) + "x" +
                       std::to_string(man.dim) + " but " + matrix_name + " is " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

LabeledMatrix load_labeled(const std::filesystem::path& npy, const std::filesystem::path& json) {
  LabeledMatrix out{load_matrix(npy), load_manifest(json)};
  validate_pairing(out.data, out.manifest, npy.string(), json.string());
  return out;
}

}  // namespace tldr
