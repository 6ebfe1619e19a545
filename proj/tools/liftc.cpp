// liftc: lift linear-algebra idioms in mini-language sources to accelerator
// API dispatch calls. Subcommands: lift (one file), bench (corpus sweep),
// train (classifier / profitability models).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "liftc/pipeline.hpp"

namespace fs = std::filesystem;
using namespace liftc;

namespace {

struct CommonOpts {
  std::vector<std::string> api_paths;
  std::size_t max_candidates = 100;
  double budget_sec = 600.0;
  int tests = 30;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int workers = 0;
  std::string out_dir;
  std::string classifier_path;
  std::string svm_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--api", o.api_paths, "api spec json (repeatable; default: all bundled)");
  cmd->add_option("--max-candidates", o.max_candidates, "candidate cap per spec")
      ->default_val(100);
  cmd->add_option("--budget-sec", o.budget_sec, "per-function time budget")->default_val(600.0);
  cmd->add_option("--tests", o.tests, "equivalence tests per candidate")->default_val(30);
  o.seed_opt = cmd->add_option("--seed", o.seed, "rng seed (fallback: env LIFTC_SEED, then 0)");
  cmd->add_option("--workers", o.workers, "worker threads (0 = hardware)")->default_val(0);
  cmd->add_option("--out-dir", o.out_dir, "artifact directory");
  cmd->add_option("--classifier-model", o.classifier_path, "classifier model json");
  cmd->add_option("--svm-model", o.svm_path, "profitability model json");
}

std::uint64_t resolve_seed(const CommonOpts& o) {
  if (o.seed_opt && o.seed_opt->count()) return o.seed;
  if (const char* env = std::getenv("LIFTC_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

std::vector<api::ApiSpec> load_specs(const std::vector<std::string>& paths) {
  std::vector<api::ApiSpec> specs;
  if (paths.empty()) {
    for (const char* n : {"gemm_rowmajor", "gemm_colmajor", "gemm_rowmajor_ld", "conv2d"})
      specs.push_back(api::load_api_spec(std::string(SPECS_DIR) + "/" + n + ".json"));
  } else {
    for (const auto& p : paths) specs.push_back(api::load_api_spec(p));
  }
  return specs;
}

std::vector<fs::path> ml_files(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ml") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Feature/label pairs from a fixture directory: every .ml whose sidecar names
// a function and a label contributes that one function.
std::vector<std::pair<classifier::FeatureVector, std::string>> corpus_examples(
    const std::string& dir) {
  std::vector<std::pair<classifier::FeatureVector, std::string>> ex;
  for (const auto& f : ml_files(dir)) {
    pipeline::FixtureMeta meta = pipeline::sidecar_for(f.string());
    if (meta.function.empty() || meta.label.empty()) continue;
    try {
      minilang::Program prog = minilang::parse_program(read_text(f));
      const auto* fn = prog.find(meta.function);
      if (fn) ex.emplace_back(classifier::extract_features(prog, *fn), meta.label);
    } catch (const std::exception&) {
      // unparseable fixtures simply contribute nothing
    }
  }
  return ex;
}

// Model resolution order: explicit flag, model file in the working
// directory, then training in memory from the fallback fixture directory.
classifier::ClassifierModel resolve_classifier(const std::string& flag_path,
                                               const std::string& train_dir,
                                               std::string& origin) {
  if (!flag_path.empty()) {
    origin = flag_path;
    return classifier::load_model(flag_path);
  }
  if (fs::exists("classifier.model.json")) {
    origin = "classifier.model.json";
    return classifier::load_model("classifier.model.json");
  }
  origin = "trained in memory from " + train_dir;
  return classifier::train_classifier(corpus_examples(train_dir));
}

bool confirmed(const std::string& function) {
  std::cout << "apply rewrite to '" << function << "'? [y/N] " << std::flush;
  std::string line;
  if (!std::getline(std::cin, line)) return false;
  return line == "y" || line == "Y" || line == "yes";
}

const api::ApiSpec* spec_by_name(const std::vector<api::ApiSpec>& specs,
                                 const std::string& name) {
  for (const auto& s : specs)
    if (s.name == name) return &s;
  return nullptr;
}

int run_lift(const std::string& file, CommonOpts& o, bool require_confirm) {
  if (!fs::is_regular_file(file)) {
    std::cerr << "liftc: no such file: " << file << "\n";
    return 1;
  }
  minilang::Program prog;
  try {
    prog = minilang::parse_program(read_text(file));
  } catch (const std::exception& e) {
    std::cerr << "liftc: " << file << ": " << e.what() << "\n";
    return 1;
  }

  pipeline::PipelineConfig cfg;
  classifier::ClassifierModel model;
  profitability::SvmModel svm;
  std::string origin;
  try {
    cfg.specs = load_specs(o.api_paths);
    model = resolve_classifier(o.classifier_path, CORPUS_DIR, origin);
    cfg.classifier = &model;
    if (!o.svm_path.empty()) {
      svm = profitability::load_svm(o.svm_path);
      cfg.svm = &svm;
    } else if (fs::exists("profitability.model.json")) {
      svm = profitability::load_svm("profitability.model.json");
      cfg.svm = &svm;
    }
  } catch (const std::exception& e) {
    std::cerr << "liftc: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "liftc: classifier: " << origin << "\n";
  cfg.max_candidates = o.max_candidates;
  cfg.budget_sec = o.budget_sec;
  cfg.tests = o.tests;
  cfg.seed = resolve_seed(o);
  cfg.workers = o.workers;

  pipeline::FixtureMeta meta = pipeline::sidecar_for(file);
  std::string tag = fs::path(file).filename().string();
  minilang::Program lifted;
  pipeline::FileReport rep = pipeline::lift_program(prog, tag, meta, cfg, &lifted);

  // the rewrite is gated on per-function confirmation when asked
  std::set<std::string> applied;
  for (const auto& fr : rep.functions)
    if (fr.status == pipeline::FunctionStatus::Lifted) applied.insert(fr.function);
  if (require_confirm && !applied.empty()) {
    std::set<std::string> keep;
    for (const auto& fn : applied)
      if (confirmed(fn))
        keep.insert(fn);
      else
        rep.warnings.push_back("rewrite of '" + fn + "' withheld: not confirmed");
    applied = keep;
    lifted = minilang::clone(prog);
    for (const auto& fr : rep.functions) {
      if (!applied.count(fr.function)) continue;
      matching::CandidateBinding b;
      b.arrays = fr.manifest.arrays;
      b.sizes = fr.manifest.sizes;
      b.scalars = fr.manifest.scalars;
      lifted = rewriter::rewrite(lifted, fr.function, b, *spec_by_name(cfg.specs, fr.winning_api))
                   .program;
    }
  }

  fs::path outd = o.out_dir.empty() ? fs::path(file).parent_path() : fs::path(o.out_dir);
  if (outd.empty()) outd = ".";
  fs::create_directories(outd);
  std::string stem = fs::path(file).stem().string();

  int lifted_count = 0;
  for (const auto& fr : rep.functions) {
    if (fr.status == pipeline::FunctionStatus::Lifted) ++lifted_count;
    std::cout << fr.function << ": " << pipeline::status_name(fr.status);
    if (fr.status == pipeline::FunctionStatus::Lifted)
      std::cout << " via " << fr.winning_api << " (rank " << fr.manifest.winner_rank << ")";
    else if (!fr.status_detail.empty())
      std::cout << " (" << fr.status_detail << ")";
    std::cout << "\n";
  }
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";

  fs::path report_path = outd / (stem + ".report.json");
  write_text(report_path, pipeline::report_to_json(rep).dump(2) + "\n");
  std::cout << "wrote " << report_path.string() << "\n";
  for (const auto& fr : rep.functions) {
    if (!applied.count(fr.function)) continue;
    fs::path mp = outd / (stem + "." + fr.function + ".manifest.json");
    rewriter::save_manifest(fr.manifest, mp.string());
    std::cout << "wrote " << mp.string() << "\n";
  }
  if (!applied.empty()) {
    fs::path lp = outd / (stem + ".lifted.ml");
    rewriter::save_program(lifted, lp.string());
    std::cout << "wrote " << lp.string() << "\n";
  }
  return lifted_count > 0 ? 0 : 2;
}

struct CategoryRow {
  int fixtures = 0, lifted = 0, no_match = 0, too_many = 0, misclassified = 0,
      analysis_failed = 0;
};

// Rank of the authored ground-truth binding among a spec's top candidates,
// -1 when absent. The truth map may cover any subset of array/size/scalar
// parameters; every covered entry must agree.
int truth_rank_in(const pipeline::SpecCandidates& sc,
                  const std::map<std::string, std::string>& truth) {
  if (truth.empty()) return -1;
  for (std::size_t i = 0; i < sc.top.size(); ++i) {
    const auto& b = sc.top[i];
    bool all = true;
    for (const auto& [k, v] : truth) {
      auto a = b.arrays.find(k);
      if (a != b.arrays.end() && a->second == v) continue;
      auto s = b.sizes.find(k);
      if (s != b.sizes.end() && s->second == v) continue;
      auto c = b.scalars.find(k);
      if (c != b.scalars.end() && c->second == v) continue;
      all = false;
      break;
    }
    if (all) return (int)i;
  }
  return -1;
}

int run_bench(const std::string& dir, CommonOpts& o) {
  if (!fs::is_directory(dir)) {
    std::cerr << "liftc: no such directory: " << dir << "\n";
    return 1;
  }

  pipeline::PipelineConfig cfg;
  classifier::ClassifierModel model;
  std::string origin;
  try {
    cfg.specs = load_specs(o.api_paths);
    if (!o.classifier_path.empty()) {
      origin = o.classifier_path;
      model = classifier::load_model(o.classifier_path);
    } else {
      origin = "trained in memory from " + dir;
      model = classifier::train_classifier(corpus_examples(dir));
    }
  } catch (const std::exception& e) {
    std::cerr << "liftc: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "liftc: classifier: " << origin << "\n";
  cfg.classifier = &model;
  cfg.max_candidates = o.max_candidates;
  cfg.budget_sec = o.budget_sec;
  cfg.tests = o.tests;
  cfg.seed = resolve_seed(o);
  cfg.workers = o.workers;

  fs::path outd = o.out_dir.empty() ? fs::path("liftc_bench_out") : fs::path(o.out_dir);
  fs::create_directories(outd);

  nlohmann::json files = nlohmann::json::array();
  std::map<std::string, CategoryRow> cats;
  nlohmann::json cand_rows = nlohmann::json::array();
  nlohmann::json phase_rows = nlohmann::json::array();
  std::ostringstream cand_csv, phase_csv;
  cand_csv << "file,function,category,params,raw,filtered,kept,truncated,winner_rank,"
              "truth_rank\n";
  phase_csv << "file,function,classify_ms,liveness_ms,dims_ms,match_ms,equivalence_ms,"
               "rewrite_ms,total_ms\n";

  int total = 0, total_lifted = 0;
  for (const auto& f : ml_files(dir)) {
    std::string tag = f.filename().string();
    minilang::Program prog;
    try {
      prog = minilang::parse_program(read_text(f));
    } catch (const std::exception& e) {
      pipeline::FileReport fail;
      fail.file = tag;
      fail.parse_error = e.what();
      files.push_back(pipeline::report_to_json(fail));
      continue;
    }
    pipeline::FixtureMeta meta = pipeline::sidecar_for(f.string());
    pipeline::FileReport rep = pipeline::lift_program(prog, tag, meta, cfg, nullptr);
    files.push_back(pipeline::report_to_json(rep));
    if (meta.function.empty()) continue;
    const pipeline::FunctionReport* fr = nullptr;
    for (const auto& r : rep.functions)
      if (r.function == meta.function) fr = &r;
    if (!fr) continue;

    ++total;
    std::string cat = meta.category.empty() ? "uncategorized" : meta.category;
    CategoryRow& row = cats[cat];
    ++row.fixtures;
    switch (fr->status) {
      case pipeline::FunctionStatus::Lifted: ++row.lifted, ++total_lifted; break;
      case pipeline::FunctionStatus::NoMatch: ++row.no_match; break;
      case pipeline::FunctionStatus::TooManyCandidates: ++row.too_many; break;
      case pipeline::FunctionStatus::Misclassified: ++row.misclassified; break;
      case pipeline::FunctionStatus::AnalysisFailed: ++row.analysis_failed; break;
    }

    const auto* fn = prog.find(meta.function);
    std::size_t params = fn ? fn->params.size() : 0;
    unsigned long long raw = 0;
    std::size_t filtered = 0, kept = 0;
    bool truncated = false;
    int truth = -1;
    const pipeline::SpecCandidates* chosen = nullptr;
    for (const auto& sc : fr->by_spec) {
      raw += sc.raw;
      filtered += sc.filtered;
      kept += sc.kept;
      truncated |= sc.truncated;
      if (!meta.api.empty() && sc.api == meta.api) chosen = &sc;
      if (meta.api.empty() && sc.api == fr->winning_api) chosen = &sc;
    }
    if (!chosen && !fr->by_spec.empty()) chosen = &fr->by_spec[0];
    if (chosen) truth = truth_rank_in(*chosen, meta.binding_truth);
    int winner = fr->status == pipeline::FunctionStatus::Lifted ? fr->manifest.winner_rank : -1;

    cand_rows.push_back({{"file", tag},
                         {"function", meta.function},
                         {"category", cat},
                         {"params", params},
                         {"raw", raw},
                         {"filtered", filtered},
                         {"kept", kept},
                         {"truncated", truncated},
                         {"winner_rank", winner},
                         {"truth_rank", truth}});
    cand_csv << tag << "," << meta.function << "," << cat << "," << params << "," << raw << ","
             << filtered << "," << kept << "," << (truncated ? 1 : 0) << "," << winner << ","
             << truth << "\n";

    auto ms = [&](const char* key) {
      auto it = fr->phase_ms.find(key);
      return it == fr->phase_ms.end() ? 0.0 : it->second;
    };
    phase_rows.push_back(
        {{"file", tag},
         {"function", meta.function},
         {"timings",
          {{"classify_ms", ms("classify_ms")},
           {"liveness_ms", ms("liveness_ms")},
           {"dims_ms", ms("dims_ms")},
           {"match_ms", ms("match_ms")},
           {"equivalence_ms", ms("equivalence_ms")},
           {"rewrite_ms", ms("rewrite_ms")},
           {"total_ms", ms("total_ms")}}}});
    char line[256];
    std::snprintf(line, sizeof line, "%s,%s,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n", tag.c_str(),
                  meta.function.c_str(), ms("classify_ms"), ms("liveness_ms"), ms("dims_ms"),
                  ms("match_ms"), ms("equivalence_ms"), ms("rewrite_ms"), ms("total_ms"));
    phase_csv << line;
  }

  nlohmann::json cat_rows = nlohmann::json::array();
  std::ostringstream cat_csv;
  cat_csv << "category,fixtures,lifted,no_match,too_many,misclassified,analysis_failed,"
             "match_rate\n";
  for (const auto& [name, row] : cats) {
    double rate = row.fixtures ? (double)row.lifted / row.fixtures : 0.0;
    cat_rows.push_back({{"category", name},
                        {"fixtures", row.fixtures},
                        {"lifted", row.lifted},
                        {"no_match", row.no_match},
                        {"too_many", row.too_many},
                        {"misclassified", row.misclassified},
                        {"analysis_failed", row.analysis_failed},
                        {"match_rate", rate}});
    char line[256];
    std::snprintf(line, sizeof line, "%s,%d,%d,%d,%d,%d,%d,%.4f\n", name.c_str(), row.fixtures,
                  row.lifted, row.no_match, row.too_many, row.misclassified, row.analysis_failed,
                  rate);
    cat_csv << line;
  }

  nlohmann::json report = {{"seed", cfg.seed},
                           {"corpus", dir},
                           {"summary", {{"fixtures", total}, {"lifted", total_lifted}}},
                           {"files", files}};
  write_text(outd / "bench_report.json", report.dump(2) + "\n");
  write_text(outd / "category_table.json", cat_rows.dump(2) + "\n");
  write_text(outd / "category_table.csv", cat_csv.str());
  write_text(outd / "candidate_table.json", cand_rows.dump(2) + "\n");
  write_text(outd / "candidate_table.csv", cand_csv.str());
  write_text(outd / "phase_times.json", phase_rows.dump(2) + "\n");
  write_text(outd / "phase_times.csv", phase_csv.str());

  std::cout << cat_csv.str();
  std::cout << "total," << total << "," << total_lifted << "\n";
  std::cout << "wrote " << (outd / "bench_report.json").string() << " and tables\n";
  return 0;
}

int run_train_classifier(const std::string& dir, const std::string& out) {
  try {
    auto ex = corpus_examples(dir);
    classifier::ClassifierModel model = classifier::train_classifier(ex);
    classifier::save_model(model, out);
    std::cout << "trained on " << ex.size() << " examples, labels:";
    for (const auto& l : model.labels) std::cout << " " << l;
    std::cout << "\nwrote " << out << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "liftc: " << e.what() << "\n";
    return 1;
  }
}

int run_train_profitability(const std::string& grid_name, int reps, const std::string& out,
                            const std::string& csv) {
  try {
    std::vector<std::vector<long long>> grid;
    if (grid_name == "tiny") {
      const long long ratios[4][3] = {{1, 1, 1}, {1, 2, 3}, {3, 1, 2}, {1, 3, 6}};
      for (const auto& r : ratios)
        for (long long mag : {16, 64, 128, 192})
          grid.push_back({r[0] * mag, r[1] * mag, r[2] * mag});
    } else {
      grid = profitability::training_grid();
    }
    std::cout << "sampling " << grid.size() << " grid points (" << reps << " reps each)...\n";
    auto samples = profitability::sample_timings(grid, reps);
    profitability::SvmModel model = profitability::train_svm(samples);
    profitability::save_svm(model, out);
    profitability::save_dataset_csv(samples, csv);
    std::cout << "train accuracy " << model.train_accuracy << " on " << samples.size()
              << " samples\nwrote " << out << " and " << csv << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "liftc: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lift linear-algebra idioms to accelerator API dispatch calls"};
  app.require_subcommand(1);

  auto* lift = app.add_subcommand("lift", "analyze one source file and rewrite matches");
  std::string lift_file;
  CommonOpts lift_opts;
  bool require_confirm = false;
  lift->add_option("file", lift_file, "mini-language source file")->required();
  add_common(lift, lift_opts);
  lift->add_flag("--require-confirm", require_confirm,
                 "ask before applying each rewrite (default: automatic)");

  auto* bench = app.add_subcommand("bench", "sweep a fixture directory and emit tables");
  std::string bench_dir;
  CommonOpts bench_opts;
  bench->add_option("dir", bench_dir, "fixture directory")->required();
  add_common(bench, bench_opts);

  auto* train = app.add_subcommand("train", "train a model");
  train->require_subcommand(1);
  auto* tc = train->add_subcommand("classifier", "train the function classifier");
  std::string tc_dir, tc_out = "classifier.model.json";
  tc->add_option("dir", tc_dir, "labeled fixture directory")->required();
  tc->add_option("--out", tc_out, "output model path")->capture_default_str();
  auto* tp = train->add_subcommand("profitability", "time the backends and train the svm");
  std::string tp_grid = "default", tp_out = "profitability.model.json",
              tp_csv = "profitability.data.csv";
  int tp_reps = 5;
  tp->add_option("--grid", tp_grid, "size grid")
      ->check(CLI::IsMember({"default", "tiny"}))
      ->capture_default_str();
  tp->add_option("--reps", tp_reps, "timing repetitions per point")->capture_default_str();
  tp->add_option("--out", tp_out, "output model path")->capture_default_str();
  tp->add_option("--csv", tp_csv, "output dataset path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (lift->parsed()) return run_lift(lift_file, lift_opts, require_confirm);
  if (bench->parsed()) return run_bench(bench_dir, bench_opts);
  if (tc->parsed()) return run_train_classifier(tc_dir, tc_out);
  if (tp->parsed()) return run_train_profitability(tp_grid, tp_reps, tp_out, tp_csv);
  return 1;
}
