#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "grouprec/checkpoint.hpp"
#include "grouprec/config.hpp"
#include "grouprec/manifest.hpp"
#include "grouprec/metrics.hpp"
#include "grouprec/trainer.hpp"

namespace fs = std::filesystem;
using namespace grouprec;

namespace {

constexpr const char* kVersionTag = "grouprec-1.0.0";

std::string fmt(Real v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GROUPREC_OUT")) return env;
  return ".";
}

struct LoadedRun {
  TrainConfig train_cfg;
  DatasetPaths paths;
  Dataset dataset;
};

LoadedRun load_run_inputs(const std::string& config_path, const std::vector<std::string>& sets,
                          bool quiet = false) {
  KeyValueConfig kv = parse_config_file(config_path);
  for (const auto& s : sets) apply_override(kv, s);
  LoadedRun run;
  run.train_cfg = to_train_config(kv);
  run.paths = to_dataset_paths(kv);
  run.dataset = load_dataset(run.paths);
  const ValidationReport rep = validate_dataset(run.dataset);
  if (!rep.ok()) throw UserError("dataset validation failed:\n" + rep.to_string());
  if (!quiet) {
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  }
  return run;
}

void add_dataset_inputs(RunManifest& man, const DatasetPaths& p) {
  man.add_input(p.train);
  man.add_input(p.user_test);
  man.add_input(p.user_negatives);
  man.add_input(p.group_train);
  man.add_input(p.group_test);
  man.add_input(p.group_negatives);
  man.add_input(p.group_members);
}

std::string metrics_csv_header(const std::vector<int>& ks) {
  std::string h = "task,mode,n_cases";
  for (int k : ks) h += ",hr@" + std::to_string(k);
  for (int k : ks) h += ",ndcg@" + std::to_string(k);
  h += ",avg";
  return h;
}

std::string metrics_csv_row(const std::string& task, const std::string& mode,
                            const RankingMetrics& m, const std::vector<int>& ks) {
  std::string row = task + "," + mode + "," + std::to_string(m.n_cases);
  for (int k : ks) row += "," + fmt(m.hr.at(k));
  for (int k : ks) row += "," + fmt(m.ndcg.at(k));
  row += "," + fmt(m.avg);
  return row;
}

void print_metrics(const std::string& task, const RankingMetrics& m, const std::vector<int>& ks) {
  std::cout << task << " (" << m.n_cases << " cases):";
  for (int k : ks) std::cout << "  HR@" << k << "=" << fmt(m.hr.at(k), "%.4f");
  for (int k : ks) std::cout << "  NDCG@" << k << "=" << fmt(m.ndcg.at(k), "%.4f");
  std::cout << "  Avg=" << fmt(m.avg, "%.4f") << '\n';
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets,
              long seed_flag, const std::string& out_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> all_sets = sets;
  if (seed_flag >= 0) all_sets.push_back("train.seed=" + std::to_string(seed_flag));
  LoadedRun run = load_run_inputs(config_path, all_sets);

  const std::string out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);
  const std::string ckpt_path = out_dir + "/checkpoint.bin";
  const std::string history_path = out_dir + "/history.csv";
  const std::string manifest_path = out_dir + "/manifest.json";

  std::ofstream history(history_path);
  if (!history) throw UserError("cannot write " + history_path);
  history << "epoch,l_par,l_pgr,l_u2i,l_total,k_prime,wall_ms\n";

  TrainedModel model = grouprec::run(run.train_cfg, run.dataset, [&](const EpochReport& r) {
    history << r.epoch << ',' << fmt(r.l_par) << ',' << fmt(r.l_pgr) << ',' << fmt(r.l_u2i) << ','
            << fmt(r.l_total) << ',' << r.k_prime << ',' << fmt(r.wall_ms, "%.1f") << '\n';
    if (r.epoch % 10 == 0 || r.epoch + 1 == run.train_cfg.epochs) {
      std::cout << "epoch " << r.epoch << "  total=" << fmt(r.l_total, "%.4f")
                << "  u2i=" << fmt(r.l_u2i, "%.4f") << "  k'=" << r.k_prime << '\n';
    }
  });
  history.close();
  save_checkpoint(ckpt_path, model);

  RunManifest man;
  man.command = "train";
  man.version_tag = kVersionTag;
  man.config = config_snapshot(run.train_cfg, run.paths);
  add_dataset_inputs(man, run.paths);
  man.artifacts["checkpoint"] = ckpt_path;
  man.artifacts["history"] = history_path;
  man.timings_ms["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  man.write(manifest_path);

  std::cout << "checkpoint: " << ckpt_path << "\nhistory: " << history_path
            << "\nmanifest: " << manifest_path << '\n';
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path,
             const std::vector<std::string>& sets, const std::string& group_mode_flag,
             const std::string& ks_csv, const std::string& out_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  LoadedRun run = load_run_inputs(config_path, sets);
  TrainedModel model = load_checkpoint(ckpt_path);
  if (model.emb.users.rows() != run.dataset.n_users ||
      model.emb.items.rows() != run.dataset.n_items) {
    throw UserError("checkpoint dimensions (" + std::to_string(model.emb.users.rows()) + "x" +
                    std::to_string(model.emb.items.rows()) + ") do not match dataset (" +
                    std::to_string(run.dataset.n_users) + "x" +
                    std::to_string(run.dataset.n_items) + ")");
  }
  GroupScoreMode mode = GroupScoreMode::MemberMean;
  if (group_mode_flag == "nearest-center") mode = GroupScoreMode::NearestCenter;
  else if (group_mode_flag != "member-mean") throw UserError("unknown --group-mode");
  const std::vector<int> ks = parse_int_list(ks_csv, "--ks");

  const std::string out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);
  const std::string metrics_path = out_dir + "/metrics.csv";
  const std::string report_path = out_dir + "/report.txt";
  const std::string manifest_path = out_dir + "/eval_manifest.json";

  std::ofstream csv(metrics_path);
  if (!csv) throw UserError("cannot write " + metrics_path);
  csv << metrics_csv_header(ks) << '\n';
  std::ofstream report(report_path);
  report << "checkpoint " << ckpt_path << "\nmode " << group_mode_flag << "\n";

  const RankingMetrics user_m = evaluate_user_rec(model.emb, run.dataset.user_eval, ks);
  print_metrics("user-rec", user_m, ks);
  csv << metrics_csv_row("user", "-", user_m, ks) << '\n';
  report << metrics_csv_row("user", "-", user_m, ks) << '\n';

  if (run.dataset.has_group_side) {
    const MatX* centers = model.has_groups ? &model.groups.centers : nullptr;
    const RankingMetrics group_m = evaluate_group_rec(model.emb, run.dataset.groups,
                                                      run.dataset.group_eval, ks, mode, centers);
    print_metrics("group-rec", group_m, ks);
    csv << metrics_csv_row("group", group_mode_flag, group_m, ks) << '\n';
    report << metrics_csv_row("group", group_mode_flag, group_m, ks) << '\n';
  } else {
    std::cout << "group-rec: unavailable (no group files in dataset)\n";
    report << "group-rec unavailable\n";
  }

  RunManifest man;
  man.command = "eval";
  man.version_tag = kVersionTag;
  man.config = config_snapshot(run.train_cfg, run.paths);
  man.config["eval.ks"] = ks_csv;
  man.config["eval.group_mode"] = group_mode_flag;
  add_dataset_inputs(man, run.paths);
  man.add_input(ckpt_path);
  man.artifacts["metrics"] = metrics_path;
  man.artifacts["report"] = report_path;
  man.timings_ms["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  man.write(manifest_path);
  return 0;
}

MatX load_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open points file: " + path);
  std::vector<std::vector<Real>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    std::vector<Real> row;
    Real v;
    while (is >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw UserError(path + ":" + std::to_string(line_no) + ": inconsistent dimension");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw UserError("points file needs at least 2 points");
  MatX m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

int cmd_identify(const std::string& points_path, const std::string& ckpt_path,
                 const std::string& quantiles_csv, long seed, long explore_budget,
                 const std::string& out_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  if (points_path.empty() == ckpt_path.empty()) {
    throw UserError("identify needs exactly one of --points or --checkpoint");
  }
  MatX points;
  if (!points_path.empty()) {
    points = load_points_file(points_path);
  } else {
    points = load_checkpoint(ckpt_path).emb.users;
  }
  QuantileGridX grid;
  grid.values = parse_real_list(quantiles_csv, "--quantiles");
  grid.validate();

  Rng rng(static_cast<std::uint64_t>(seed));
  IdentifyTrace trace;
  const CandidateSetX set =
      identify_groups<Real>(points, grid, rng, explore_budget, &trace);
  const auto assignment = nearest_center_assignment<Real>(points, set.centers);

  std::string sc_text = "n/a";
  if (set.k_prime >= 2) {
    std::vector<Index> sizes(static_cast<std::size_t>(set.k_prime), 0);
    for (Index a : assignment) ++sizes[static_cast<std::size_t>(a)];
    const long non_empty = std::count_if(sizes.begin(), sizes.end(), [](Index s) { return s > 0; });
    if (non_empty >= 2) sc_text = fmt(silhouette(points, assignment));
  }

  const std::string out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);
  const std::string out_path = out_dir + "/identify.txt";
  std::ofstream out(out_path);
  if (!out) throw UserError("cannot write " + out_path);
  out << "k_prime " << set.k_prime << '\n';
  out << "input_points " << trace.input_points << '\n';
  out << "premerged_duplicates " << trace.premerged_duplicates << '\n';
  out << "explored " << trace.explored << '\n';
  out << "silhouette " << sc_text << '\n';
  for (Index c = 0; c < set.k_prime; ++c) {
    out << "center " << c << ' ' << fmt(set.radius(c), "%.17g") << ' '
        << fmt(set.density(c), "%.17g");
    for (Index j = 0; j < set.centers.cols(); ++j) {
      out << ' ' << fmt(set.centers(c, j), "%.17g");
    }
    out << '\n';
  }
  for (Index i = 0; i < points.rows(); ++i) {
    out << "assign " << i << ' ' << assignment[static_cast<std::size_t>(i)] << '\n';
  }
  out.close();

  RunManifest man;
  man.command = "identify";
  man.version_tag = kVersionTag;
  man.config["gim.quantiles"] = quantiles_csv;
  man.config["gim.explore_budget"] = std::to_string(explore_budget);
  man.config["seed"] = std::to_string(seed);
  if (!points_path.empty()) man.add_input(points_path);
  if (!ckpt_path.empty()) man.add_input(ckpt_path);
  man.artifacts["identify"] = out_path;
  man.timings_ms["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir + "/identify_manifest.json");

  std::cout << "k_prime " << set.k_prime << "  silhouette " << sc_text << "  -> " << out_path
            << '\n';
  return 0;
}

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> overrides;
  std::uint64_t seed = 0;
};

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& grid_spec, const std::string& seeds_csv, int jobs,
              const std::string& out_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  // Grid: "key=v1,v2;key2=v1,v2" crossed with the seed list.
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  {
    std::stringstream ss(grid_spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
      if (part.empty()) continue;
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw UserError("grid axis needs key=v1,v2,...: " + part);
      std::vector<std::string> vals;
      std::stringstream vs(part.substr(eq + 1));
      std::string v;
      while (std::getline(vs, v, ',')) {
        if (!v.empty()) vals.push_back(v);
      }
      if (vals.empty()) throw UserError("empty grid axis: " + part);
      axes.emplace_back(part.substr(0, eq), vals);
    }
  }
  if (axes.empty()) throw UserError("sweep: empty grid");
  std::vector<std::uint64_t> seeds;
  for (int s : parse_int_list(seeds_csv, "--seeds")) seeds.push_back(static_cast<std::uint64_t>(s));

  std::vector<SweepPoint> points;
  std::vector<std::size_t> cursor(axes.size(), 0);
  for (;;) {
    SweepPoint base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      base.overrides.emplace_back(axes[a].first, axes[a].second[cursor[a]]);
    }
    for (std::uint64_t s : seeds) {
      SweepPoint p = base;
      p.seed = s;
      points.push_back(p);
    }
    std::size_t a = 0;
    for (; a < axes.size(); ++a) {
      if (++cursor[a] < axes[a].second.size()) break;
      cursor[a] = 0;
    }
    if (a == axes.size()) break;
  }

  const std::string out_dir = resolve_out_dir(out_flag);
  fs::create_directories(out_dir);
  const std::vector<int> ks = {5, 10};

  // The dataset is immutable after loading and shared across workers.
  LoadedRun shared = load_run_inputs(config_path, sets, true);

  struct RowPair {
    std::string user_row;
    std::string group_row;
  };
  std::vector<RowPair> rows(points.size());
  std::mutex io_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const SweepPoint& p = points[i];
      std::vector<std::string> run_sets = sets;
      std::string label;
      for (const auto& [k, v] : p.overrides) {
        run_sets.push_back(k + "=" + v);
        label += k + "=" + v + ",";
      }
      run_sets.push_back("train.seed=" + std::to_string(p.seed));
      KeyValueConfig kv = parse_config_file(config_path);
      for (const auto& s : run_sets) apply_override(kv, s);
      const TrainConfig tc = to_train_config(kv);
      TrainedModel model = grouprec::run(tc, shared.dataset);

      std::string prefix;
      for (const auto& [k, v] : p.overrides) prefix += v + ",";
      prefix += std::to_string(p.seed);
      const RankingMetrics um = evaluate_user_rec(model.emb, shared.dataset.user_eval, ks);
      rows[i].user_row = prefix + ",user," + fmt(um.hr.at(5)) + "," + fmt(um.hr.at(10)) + "," +
                         fmt(um.ndcg.at(5)) + "," + fmt(um.ndcg.at(10)) + "," + fmt(um.avg);
      if (shared.dataset.has_group_side) {
        const MatX* centers = model.has_groups ? &model.groups.centers : nullptr;
        const RankingMetrics gm =
            evaluate_group_rec(model.emb, shared.dataset.groups, shared.dataset.group_eval, ks,
                               GroupScoreMode::MemberMean, centers);
        rows[i].group_row = prefix + ",group," + fmt(gm.hr.at(5)) + "," + fmt(gm.hr.at(10)) + "," +
                            fmt(gm.ndcg.at(5)) + "," + fmt(gm.ndcg.at(10)) + "," + fmt(gm.avg);
      }
      {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << "sweep " << label << "seed=" << p.seed << " done\n";
      }
    }
  };
  const int n_workers = std::max(1, jobs);
  std::vector<std::thread> threads;
  for (int w = 0; w < n_workers - 1; ++w) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();

  const std::string csv_path = out_dir + "/sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw UserError("cannot write " + csv_path);
  std::string header;
  for (const auto& [k, _] : axes) header += k + ",";
  csv << header << "seed,task,hr@5,hr@10,ndcg@5,ndcg@10,avg\n";
  for (const auto& r : rows) {
    csv << r.user_row << '\n';
    if (!r.group_row.empty()) csv << r.group_row << '\n';
  }
  csv.close();

  RunManifest man;
  man.command = "sweep";
  man.version_tag = kVersionTag;
  man.config = config_snapshot(shared.train_cfg, shared.paths);
  man.config["sweep.grid"] = grid_spec;
  man.config["sweep.seeds"] = seeds_csv;
  add_dataset_inputs(man, shared.paths);
  man.artifacts["sweep"] = csv_path;
  man.timings_ms["total"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  man.write(out_dir + "/sweep_manifest.json");
  std::cout << "sweep csv: " << csv_path << '\n';
  return 0;
}

int cmd_inspect(const std::string& ckpt_path) {
  const TrainedModel model = load_checkpoint(ckpt_path);
  std::cout << "users " << model.emb.users.rows() << "\nitems " << model.emb.items.rows()
            << "\ndim " << model.emb.dim << "\nepochs_done " << model.next_epoch << "\nhas_groups "
            << (model.has_groups ? "yes" : "no") << '\n';
  if (model.has_groups) {
    std::cout << "k_prime " << model.groups.k_prime << '\n';
  }
  std::cout << "adam_steps_users " << model.opt_users.step << "\nadam_steps_items "
            << model.opt_items.step << '\n';
  std::cout << "user_norm_mean " << fmt(model.emb.users.rowwise().norm().mean(), "%.4f")
            << "\nitem_norm_mean " << fmt(model.emb.items.rowwise().norm().mean(), "%.4f") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised group discovery and self-supervised group recommendation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt_path, points_path;
  std::vector<std::string> sets;
  long seed_flag = -1;

  auto* train = app.add_subcommand("train", "Train a model from a config file");
  train->add_option("--config", config_path, "Config file")->required();
  train->add_option("--set", sets, "Override config key=value");
  train->add_option("--seed", seed_flag, "Shorthand for --set train.seed=N");
  train->add_option("--out", out_dir, "Output directory (default $GROUPREC_OUT or .)");

  std::string group_mode = "member-mean", ks_csv = "5,10";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--config", config_path, "Config file (dataset section)")->required();
  eval->add_option("--set", sets, "Override config key=value");
  eval->add_option("--group-mode", group_mode, "member-mean | nearest-center");
  eval->add_option("--ks", ks_csv, "Cutoffs, default 5,10");
  eval->add_option("--out", out_dir, "Output directory");

  std::string quantiles_csv = "0.1,0.2,0.3";
  long identify_seed = 1, explore_budget = -1;
  auto* identify = app.add_subcommand("identify", "Run group identification on points");
  identify->add_option("--points", points_path, "Text file, one vector per line");
  identify->add_option("--checkpoint", ckpt_path, "Use user embeddings from a checkpoint");
  identify->add_option("--quantiles", quantiles_csv, "Radius quantiles");
  identify->add_option("--seed", identify_seed, "Generator seed");
  identify->add_option("--explore-budget", explore_budget, "-1 = one per candidate");
  identify->add_option("--out", out_dir, "Output directory");

  std::string grid_spec, seeds_csv = "1,2,3";
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Grid of training runs, consolidated CSV");
  sweep->add_option("--config", config_path, "Config file")->required();
  sweep->add_option("--set", sets, "Common overrides");
  sweep->add_option("--grid", grid_spec, "key=v1,v2;key2=...")->required();
  sweep->add_option("--seeds", seeds_csv, "Seed list");
  sweep->add_option("--jobs", jobs, "Parallel workers");
  sweep->add_option("--out", out_dir, "Output directory");

  auto* inspect = app.add_subcommand("inspect-checkpoint", "Print checkpoint summary");
  inspect->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, sets, seed_flag, out_dir);
    if (eval->parsed()) return cmd_eval(ckpt_path, config_path, sets, group_mode, ks_csv, out_dir);
    if (identify->parsed()) {
      return cmd_identify(points_path, ckpt_path, quantiles_csv, identify_seed, explore_budget,
                          out_dir);
    }
    if (sweep->parsed()) return cmd_sweep(config_path, sets, grid_spec, seeds_csv, jobs, out_dir);
    if (inspect->parsed()) return cmd_inspect(ckpt_path);
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
