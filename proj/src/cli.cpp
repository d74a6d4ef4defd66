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

#include "tldr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tldr/digest.hpp"
#include "tldr/embedding_store.hpp"
#include "tldr/eval.hpp"
#include "tldr/head.hpp"
#include "tldr/projector.hpp"
#include "tldr/synth.hpp"
#include "tldr/text_dataset.hpp"
#include "tldr/train.hpp"
#include "tldr/vocab.hpp"

namespace tldr {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::vector<double> parse_lambda_grid(const std::string& text) {
  std::vector<double> grid;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + s + "' in lambda grid");
    }
    if (used != s.size()) throw UsageError("bad number '" + s + "' in lambda grid");
    return v;
  };
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    if (item.find(':') == std::string::npos) {
      grid.push_back(number(item));
      continue;
    }
    std::vector<std::string> parts;
    std::stringstream ps(item);
    std::string part;
    while (std::getline(ps, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("lambda range '" + item + "' must be lo:hi:step");
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0) || !(hi >= lo)) throw UsageError("lambda range '" + item + "' needs hi >= lo and step > 0");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    if (count > 1000000) throw UsageError("lambda range '" + item + "' is too long");
    for (long i = 0; i <= count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw UsageError("lambda grid is empty");
  if (!(grid.front() >= 0) || !std::isfinite(grid.back())) {
    throw UsageError("lambda grid entries must be finite and non-negative");
  }
  return grid;
}

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log = "text";
  std::string out;
};

class Logger {
 public:
  Logger(std::ostream& err, const std::string& mode) : err_(err), json_(mode == "json") {}
  void info(const std::string& msg) const { emit("info", msg); }
  void error(const std::string& msg) const { emit("error", msg); }

 private:
  void emit(const char* level, const std::string& msg) const {
    if (json_) {
      ojson j;
      j["level"] = level;
      j["msg"] = msg;
      err_ << j.dump() << "\n";
    } else {
      err_ << "tldr: " << (std::string(level) == "error" ? "error: " : "") << msg << "\n";
    }
  }
  std::ostream& err_;
  bool json_;
};

// Tracks the resolved configuration and input digests of one run.
class Run {
 public:
  Run(std::string subcommand, const Globals& g) : subcommand_(std::move(subcommand)), g_(g) {
    config_["seed"] = g.seed;
    config_["threads"] = g.threads;
  }
  template <typename T>
  void set(const std::string& key, const T& value) {
    config_[key] = value;
  }
  const fs::path& input(const fs::path& p) {
    if (!fs::exists(p)) throw IoError("input file '" + p.string() + "' does not exist");
    inputs_[p.string()] = sha256_file(p);
    return p;
  }
  fs::path out_dir() const {
    if (g_.out.empty()) throw UsageError("--out is required");
    return fs::path(g_.out);
  }
  void finish() const {
    ojson j;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    ojson in = ojson::object();
    for (const auto& [k, v] : inputs_) in[k] = v;
    j["inputs"] = in;
    fs::create_directories(out_dir());
    write_file(out_dir() / "run.json", j.dump(1) + "\n");
  }

 private:
  std::string subcommand_;
  const Globals& g_;
  ojson config_;
  std::map<std::string, std::string> inputs_;
};

// Manifest path: explicit flag, else the NPY path with a .json extension when present.
std::optional<fs::path> manifest_path(const std::string& npy, const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  fs::path p(npy);
  p.replace_extension(".json");
  if (fs::exists(p)) return p;
  return std::nullopt;
}

struct Loaded {
  EmbeddingMatrix data;
  std::optional<Manifest> manifest;
  fs::path manifest_file;
};

Loaded load_input(Run& run, const std::string& npy, const std::string& manifest_flag) {
  Loaded l;
  l.data = load_matrix(run.input(npy));
  if (auto mp = manifest_path(npy, manifest_flag)) {
    l.manifest = load_manifest(run.input(*mp));
    l.manifest_file = *mp;
    validate_pairing(l.data, *l.manifest, npy, mp->string());
  }
  return l;
}

void require_same_ids(const Loaded& a, const Loaded& b) {
  if (!a.manifest || !b.manifest) return;
  if (a.manifest->ids != b.manifest->ids) {
    throw PairingError("rows of " + a.manifest_file.string() + " and " + b.manifest_file.string() +
                       " are not aligned (ids differ)");
  }
}

Manifest require_labels(const Loaded& l, const std::string& what) {
  if (!l.manifest || !l.manifest->labels || !l.manifest->groups) {
    throw SchemaError(what + " needs a manifest with labels and groups");
  }
  return *l.manifest;
}

void cmd_gap_estimate(Run& run, const std::string& images, const std::string& images_man,
                      const std::string& texts, const std::string& texts_man, int max_pairs,
                      bool normalize, const Logger& log) {
  Loaded I = load_input(run, images, images_man);
  Loaded T = load_input(run, texts, texts_man);
  run.set("normalize", normalize);
  if (normalize) {
    I.data = l2_normalize_rows(I.data);
    T.data = l2_normalize_rows(T.data);
  }
  require_same_ids(I, T);
  if (I.data.rows() != T.data.rows()) {
    throw PairingError(images + " has " + std::to_string(I.data.rows()) + " rows but " + texts +
                       " has " + std::to_string(T.data.rows()));
  }
  Eigen::Index n = I.data.rows();
  if (max_pairs >= 0) n = std::min<Eigen::Index>(n, max_pairs);
  run.set("max_pairs", max_pairs);
  const auto est = estimate_gap(I.data.topRows(n), T.data.topRows(n));
  std::vector<std::string> ids;
  for (Eigen::Index i = 0; i < n; ++i) {
    ids.push_back(I.manifest ? I.manifest->ids[static_cast<std::size_t>(i)] : std::to_string(i));
  }
  save_gap(est, ids, run.out_dir());
  log.info("gap estimated from " + std::to_string(n) + " pairs, |g| = " + std::to_string(est.g.norm()));
}

void cmd_fit_projector(Run& run, const std::string& x, const std::string& y, const std::string& vx,
                       const std::string& vy, const std::string& gap, bool unconstrained,
                       const std::string& grid_text, int threads, const Logger& log) {
  if (unconstrained == !gap.empty()) throw UsageError("give exactly one of --gap and --unconstrained");
  const std::vector<double> grid = parse_lambda_grid(grid_text);
  run.set("lambda_grid", grid);
  run.set("constrained", !unconstrained);
  Loaded X = load_input(run, x, "");
  Loaded Y = load_input(run, y, "");
  require_same_ids(X, Y);
  std::optional<VectorXr> g;
  if (!gap.empty()) g = load_vector(run.input(gap));

  Projector<double> p;
  ojson table = ojson::array();
  if (vx.empty() != vy.empty()) throw UsageError("--val-x and --val-y go together");
  if (vx.empty()) {
    if (grid.size() != 1) throw UsageError("a lambda grid with several values needs --val-x/--val-y");
    p = fit_projector(X.data, Y.data, g, grid[0]);
  } else {
    Loaded VX = load_input(run, vx, "");
    Loaded VY = load_input(run, vy, "");
    require_same_ids(VX, VY);
    RidgeConfig cfg{grid, !unconstrained};
    auto res = search_lambda<double>(X.data, Y.data, VX.data, VY.data, g, cfg, threads);
    p = std::move(res.best);
    for (const auto& s : res.table) {
      ojson row;
      row["lambda"] = s.lambda;
      row["mean_nmse"] = s.mean_nmse ? ojson(*s.mean_nmse) : ojson(nullptr);
      if (!s.error.empty()) row["error"] = s.error;
      table.push_back(row);
    }
  }
  fs::create_directories(run.out_dir());
  save_projector(p, run.out_dir());
  if (!table.empty()) write_file(run.out_dir() / "lambda_search.json", table.dump(1) + "\n");
  std::string msg = "projector fitted, lambda = " + std::to_string(p.lambda);
  if (p.ortho_residual) msg += ", |W^T g|_1 / d_feat = " + std::to_string(*p.ortho_residual);
  log.info(msg);
}

void cmd_filter(Run& run, const std::string& vocab, const std::string& bank, const std::string& index,
                const std::string& projector, const std::string& head, const FilterOptions& opts,
                const Logger& log) {
  run.set("relu", opts.relu);
  run.set("ttest", opts.ttest);
  run.set("fdr_q", opts.fdr_q);
  const Vocabulary v = load_vocabulary(run.input(vocab));
  const TextEmbeddingBank b = load_bank(run.input(bank), run.input(index));
  run.input(fs::path(projector) / "W.npy");
  run.input(fs::path(head) / "W_head.npy");
  const Projector<double> p = load_projector(projector);
  const LinearHead<double> h = load_head(head);
  const FilteredVocabulary fv = run_filter_pipeline(v, b, p, h, opts);
  fs::create_directories(run.out_dir());
  write_file(run.out_dir() / "filtered_vocab.json", filtered_to_json(fv));
  std::size_t dropped = 0;
  for (const auto& r : fv.audit) dropped += !r.kept;
  log.info("filtered vocabulary: " + std::to_string(fv.audit.size() - dropped) + " kept, " +
           std::to_string(dropped) + " dropped");
}

void cmd_build_bank_index(Run& run, const std::string& vocab, const std::string& templates_flag,
                          int dim, const Logger& log) {
  if (dim <= 0) throw UsageError("--dim must be positive");
  const Vocabulary v = dedup(load_vocabulary(run.input(vocab)));
  const fs::path tpath = resolve_templates_path(templates_flag);
  const PromptTemplateSet ts = load_templates(run.input(tpath));
  std::vector<std::string> words;
  auto add = [&](const std::string& w) {
    const std::string n = normalize_word(w);
    if (std::find(words.begin(), words.end(), n) == words.end()) words.push_back(n);
  };
  for (const auto& c : v.classes) add(c.name);
  for (const auto& a : v.attributes) add(a.name);
  for (const auto& c : v.classes) for (const auto& w : c.words) add(w);
  for (const auto& a : v.attributes) for (const auto& w : a.words) add(w);
  const auto it = std::find(ts.templates.begin(), ts.templates.end(), "a photo of a {c}.");
  const int anchor = it == ts.templates.end() ? 0 : static_cast<int>(it - ts.templates.begin());
  run.set("dim", dim);
  run.set("anchor_template", anchor);
  fs::create_directories(run.out_dir());
  write_file(run.out_dir() / "bank_index.json",
             bank_index_json(words, static_cast<int>(ts.templates.size()), anchor, dim, ts.templates));
  log.info("bank index: " + std::to_string(words.size()) + " words x " +
           std::to_string(ts.templates.size()) + " templates");
}

struct RetrainFlags {
  std::string filtered, groups, bank, index, projector, head, val_features, val_manifest, config;
  std::string optimizer, scheduler;
  double lr = 0, weight_decay = 0, momentum = 0;
  int batch_size = 0, epochs = 0;
  bool relu = false, cache = false;
};

void cmd_retrain(Run& run, const RetrainFlags& f, const CLI::App& sub, std::uint64_t seed,
                 const Logger& log) {
  TrainConfig cfg;
  if (!f.config.empty()) cfg = parse_train_config(read_file(run.input(f.config)), f.config);
  if (sub.count("--optimizer")) {
    if (f.optimizer == "sgd") cfg.optimizer = OptimizerKind::kSgd;
    else if (f.optimizer == "adamw") cfg.optimizer = OptimizerKind::kAdamW;
    else throw UsageError("unknown optimizer '" + f.optimizer + "'");
  }
  if (sub.count("--scheduler")) {
    if (f.scheduler == "none") cfg.scheduler = SchedulerKind::kNone;
    else if (f.scheduler == "cosine") cfg.scheduler = SchedulerKind::kCosine;
    else throw UsageError("unknown scheduler '" + f.scheduler + "'");
  }
  if (sub.count("--lr")) cfg.lr = f.lr;
  if (sub.count("--weight-decay")) cfg.weight_decay = f.weight_decay;
  if (sub.count("--momentum")) cfg.momentum = f.momentum;
  if (sub.count("--batch-size")) cfg.batch_size = f.batch_size;
  if (sub.count("--epochs")) cfg.epochs = f.epochs;
  if (sub.count("--relu")) cfg.relu_on_projection = true;
  if (sub.count("--cache-projected")) cfg.cache_projected = true;
  cfg.seed = seed;
  cfg.validate();
  run.set("train", nlohmann::json::parse(config_to_json(cfg)));

  const FilteredVocabulary fv = parse_filtered(read_file(run.input(f.filtered)), f.filtered);
  const GroupSpec spec = load_group_spec(run.input(f.groups));
  const TextEmbeddingBank bank = load_bank(run.input(f.bank), run.input(f.index));
  run.input(fs::path(f.projector) / "W.npy");
  run.input(fs::path(f.head) / "W_head.npy");
  const Projector<double> p = load_projector(f.projector);
  const LinearHead<double> head = load_head(f.head);
  Loaded V = load_input(run, f.val_features, f.val_manifest);
  const Manifest vm = require_labels(V, f.val_features);
  const ValidationSet val{V.data, *vm.labels, *vm.groups, spec};

  const TextPairDataset ds = build_dataset(fv, spec, bank);
  const TrainResult r = retrain(head, ds, p, val, cfg);
  save_train_result(r, cfg, run.out_dir());
  log.info("retrained head: best epoch " + std::to_string(r.best_epoch) + ", val WGA " +
           std::to_string(r.best_val_wga));
}

void cmd_evaluate(Run& run, const std::string& head_dir, const std::string& features,
                  const std::string& manifest, const std::string& groups, const std::string& weights,
                  std::ostream& out, const Logger& log) {
  const WeightMode mode = weight_mode_from_string(weights);
  run.set("weights", weights);
  const fs::path w_head = fs::path(head_dir) / "W_head.npy";
  run.input(w_head);
  run.input(fs::path(head_dir) / "b_head.npy");
  const LinearHead<double> head = load_head(head_dir);
  Loaded F = load_input(run, features, manifest);
  const Manifest m = require_labels(F, features);
  const GroupSpec spec = load_group_spec(run.input(groups));
  EvalReport rep = evaluate(head, F.data, *m.labels, *m.groups, spec, mode);
  rep.head_meta = "W_head sha256 " + sha256_file(w_head);
  const std::string text = report_to_json(rep);
  fs::create_directories(run.out_dir());
  write_file(run.out_dir() / "report.json", text);
  out << text;
  log.info("WGA " + std::to_string(rep.wga) + ", mean accuracy " + std::to_string(rep.mean_acc));
}

void cmd_report(Run& run, const std::string& a, const std::string& b, std::ostream& out) {
  const EvalReport ra = parse_report(read_file(run.input(a)), a);
  const EvalReport rb = parse_report(read_file(run.input(b)), b);
  const std::string text = delta_to_json(compare_reports(ra, rb));
  fs::create_directories(run.out_dir());
  write_file(run.out_dir() / "delta.json", text);
  out << text;
}

void cmd_synth(Run& run, const std::string& preset_name, std::uint64_t seed, const Logger& log) {
  run.set("preset", preset_name);
  const synth::SynthWorld w = synth::preset(preset_name, seed);
  const synth::SynthBundle b = synth::generate(w);
  synth::write_bundle(b, run.out_dir());
  log.info("synthetic world '" + preset_name + "' written to " + run.out_dir().string());
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::kUsage: return 1;
    case ErrorClass::kData: return 2;
    case ErrorClass::kNumerical: return 3;
  }
  return 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tldr: debias a classifier's last layer with text embeddings"};
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads (default 1)")->check(CLI::PositiveNumber);
  app.add_option("--log", g.log, "Diagnostic format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--out", g.out, "Output directory");

  std::string images, images_man, texts, texts_man;
  int max_pairs = -1;
  bool normalize = false;
  auto* gap = app.add_subcommand("gap-estimate", "Estimate the modality gap from paired embeddings");
  gap->add_option("--images", images, "Image embeddings (NPY)")->required();
  gap->add_option("--texts", texts, "Text embeddings (NPY)")->required();
  gap->add_option("--images-manifest", images_man, "Manifest for --images");
  gap->add_option("--texts-manifest", texts_man, "Manifest for --texts");
  gap->add_option("--max-pairs", max_pairs, "Use only the first N pairs");
  gap->add_flag("--normalize", normalize, "L2-normalize rows first (diagnostics only)");

  std::string fx, fy, fvx, fvy, fgap, grid;
  bool unconstrained = false;
  auto* fit = app.add_subcommand("fit-projector", "Fit the linear map from joint space to feature space");
  fit->add_option("--x", fx, "Joint-space image embeddings (NPY)")->required();
  fit->add_option("--y", fy, "Classifier features (NPY)")->required();
  fit->add_option("--val-x", fvx, "Validation joint-space embeddings");
  fit->add_option("--val-y", fvy, "Validation features");
  fit->add_option("--gap", fgap, "Gap vector (NPY) to constrain against");
  fit->add_flag("--unconstrained", unconstrained, "Fit plain ridge regression");
  fit->add_option("--lambda-grid", grid, "List '0.1,1,10' or range 'lo:hi:step'")->required();

  std::string vocab, bank, index, projector, head;
  FilterOptions fopts;
  auto* filt = app.add_subcommand("filter", "Filter the word vocabulary");
  filt->add_option("--vocab", vocab, "Vocabulary JSON")->required();
  filt->add_option("--bank", bank, "Text embedding bank (NPY)")->required();
  filt->add_option("--bank-index", index, "Bank index JSON")->required();
  filt->add_option("--projector", projector, "Projector directory")->required();
  filt->add_option("--head", head, "Head directory")->required();
  filt->add_flag("--relu", fopts.relu, "Apply ReLU after projection");
  filt->add_flag("--ttest", fopts.ttest, "Run the paired t-test filter on attribute words");
  filt->add_option("--fdr-q", fopts.fdr_q, "False discovery rate for the t-test filter");

  std::string bvocab, templates;
  int dim = 0;
  auto* bbi = app.add_subcommand("build-bank-index", "Write the (word, template) row layout for a bank");
  bbi->add_option("--vocab", bvocab, "Vocabulary JSON")->required();
  bbi->add_option("--dim", dim, "Embedding dimension")->required();
  bbi->add_option("--templates", templates, "Prompt template JSON (default: shipped 80 templates)");

  RetrainFlags rf;
  auto* rt = app.add_subcommand("retrain", "Retrain the last layer on projected text embeddings");
  rt->add_option("--filtered", rf.filtered, "Filtered vocabulary JSON")->required();
  rt->add_option("--groups", rf.groups, "Group spec JSON")->required();
  rt->add_option("--bank", rf.bank, "Text embedding bank (NPY)")->required();
  rt->add_option("--bank-index", rf.index, "Bank index JSON")->required();
  rt->add_option("--projector", rf.projector, "Projector directory")->required();
  rt->add_option("--head", rf.head, "Initial head directory")->required();
  rt->add_option("--val-features", rf.val_features, "Validation image features (NPY)")->required();
  rt->add_option("--val-manifest", rf.val_manifest, "Manifest for --val-features");
  rt->add_option("--config", rf.config, "Train config JSON; flags override it");
  rt->add_option("--optimizer", rf.optimizer, "sgd|adamw");
  rt->add_option("--scheduler", rf.scheduler, "none|cosine");
  rt->add_option("--lr", rf.lr, "Learning rate");
  rt->add_option("--weight-decay", rf.weight_decay, "Weight decay");
  rt->add_option("--momentum", rf.momentum, "SGD momentum");
  rt->add_option("--batch-size", rf.batch_size, "Batch size");
  rt->add_option("--epochs", rf.epochs, "Epochs");
  rt->add_flag("--relu", rf.relu, "Apply ReLU to projected text embeddings");
  rt->add_flag("--cache-projected", rf.cache, "Project the whole bank once");

  std::string ehead, efeat, eman, egroups, eweights = "train";
  auto* ev = app.add_subcommand("evaluate", "Per-group and worst-group accuracy of a head");
  ev->add_option("--head", ehead, "Head directory")->required();
  ev->add_option("--features", efeat, "Image features (NPY)")->required();
  ev->add_option("--manifest", eman, "Manifest for --features");
  ev->add_option("--groups", egroups, "Group spec JSON")->required();
  ev->add_option("--weights", eweights, "Mean accuracy weights: train|uniform|test")
      ->check(CLI::IsMember({"train", "spec", "uniform", "test"}));

  std::string preset_name = "tiny";
  auto* syn = app.add_subcommand("synth", "Generate a synthetic world");
  syn->add_option("--preset", preset_name, "tiny|waterbirds-like|spuco-like")
      ->check(CLI::IsMember({"tiny", "waterbirds-like", "spuco-like"}));

  std::string ra, rb;
  auto* rep = app.add_subcommand("report", "Per-group deltas between two reports (b - a)");
  rep->add_option("--a", ra, "First report")->required();
  rep->add_option("--b", rb, "Second report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const Logger log(err, g.log);
  CLI::App* sub = app.get_subcommands().front();
  try {
    Run run(sub->get_name(), g);
    run.out_dir();
    if (sub == gap) {
      cmd_gap_estimate(run, images, images_man, texts, texts_man, max_pairs, normalize, log);
    } else if (sub == fit) {
      cmd_fit_projector(run, fx, fy, fvx, fvy, fgap, unconstrained, grid, g.threads, log);
    } else if (sub == filt) {
      cmd_filter(run, vocab, bank, index, projector, head, fopts, log);
    } else if (sub == bbi) {
      cmd_build_bank_index(run, bvocab, templates, dim, log);
    } else if (sub == rt) {
      cmd_retrain(run, rf, *rt, g.seed, log);
    } else if (sub == ev) {
      cmd_evaluate(run, ehead, efeat, eman, egroups, eweights, out, log);
    } else if (sub == syn) {
      cmd_synth(run, preset_name, g.seed, log);
    } else if (sub == rep) {
      cmd_report(run, ra, rb, out);
    }
    run.finish();
  } catch (const Error& e) {
    log.error(e.what());
    if (e.error_class() == ErrorClass::kUsage) err << sub->help();
    return exit_code(e.error_class());
  } catch (const fs::filesystem_error& e) {
    log.error(std::string("IoError: ") + e.what());
    return 2;
  } catch (const std::bad_alloc&) {
    log.error("out of memory");
    return 3;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"tldr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tldr
