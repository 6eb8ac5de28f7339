// msdd: command-line front end of the multiple-scattering DD solver.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "msdd/msdd.hpp"

using namespace msdd;

namespace {

struct Common {
  std::string config, out;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* app, Common& c, bool config_required, bool out_required) {
  auto* cfg = app->add_option("--config", c.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  if (config_required) cfg->required();
  auto* out = app->add_option("--out", c.out, "output directory");
  if (out_required) out->required();
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option_function<std::uint64_t>(
      "--seed-override", [&c](const std::uint64_t& s) { c.seed = s, c.seed_set = true; },
      "replace the cloud seed");
}

RunConfig load(const Common& c) {
  RunConfig cfg = in_stage("config", [&] { return load_config(c.config); });
  if (c.seed_set) {
    if (!cfg.cloud) throw StageError("config", "--seed-override needs a random scatterer spec");
    cfg.cloud->seed = c.seed;
  }
  return cfg;
}

void set_threads(const Common& c) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#else
  (void)c;
#endif
}

void log(const std::string& s) { std::cerr << s << '\n'; }

int cmd_run(const Common& c) {
  const RunConfig cfg = load(c);
  const RunResult r = run_pipeline(cfg, log);
  in_stage("output", [&] { r.files.write(c.out); });
  std::cout << "wrote " << r.files.files().size() << " files to " << c.out << " (content "
            << r.meta["content_hash"].get<std::string>() << ")\n";
  return 0;
}

int cmd_oracle_compare(const Common& c) {
  RunConfig cfg = load(c);
  cfg.oracle.enabled = true;
  const RunResult r = run_pipeline(cfg, log);
  if (!c.out.empty()) in_stage("output", [&] { r.files.write(c.out); });
  const json& m = r.meta;
  std::printf("%10s %10s %12s %12s %12s %14s\n", "scatterers", "unknowns", "offline[s]", "elim[s]", "solve[s]",
              "far-field err");
  for (std::size_t i = 0; i < r.oracle_errors.size(); ++i)
    std::printf("%10d %10d %12.3f %12.3f %12.3f %14.3e\n", m["sizes"]["scatterers"].get<int>(),
                m["sizes"]["scatterer_unknowns"].get<int>(), m["timings"]["offline"].get<double>(),
                m["timings"]["elimination"].get<double>(), m["timings"]["solution"].get<double>(),
                r.oracle_errors[i]);
  return 0;
}

// Global BIE against the Mie series for one circle, at n and 2n nodes.
int cmd_mie_check(const Common& c) {
  double k = 8.0, angle = 0.0, radius = 1.0;
  Vec2 center(0, 0);
  int n = 128, count = 360;
  if (!c.config.empty()) {
    const RunConfig cfg = load(c);
    if (cfg.scatterer_list.size() != 1 || !cfg.scatterer_list[0].is_circle())
      throw StageError("config", "mie-check needs a scatterer_list with exactly one circle");
    k = cfg.k;
    angle = cfg.incidence.front();
    radius = cfg.scatterer_list[0].radius();
    center = cfg.scatterer_list[0].center();
    n = cfg.disc.n_per_scatterer;
    count = cfg.far_field_count;
  }
  const auto theta = FarFieldSamples::uniform_angles(count);
  const MieSeries mie(radius, center, k, angle);
  FarFieldSamples ref;
  ref.angles = theta;
  ref.values = mie.far_field(theta);
  const IncidentField f = IncidentField::plane_wave(k, angle);
  std::vector<double> err;
  FarFieldSamples first;
  for (int m : {n, 2 * n}) {
    GlobalBieOptions o;
    o.n_per_scatterer = m;
    const auto g = in_stage("oracle", [&] { return global_bie_solve({Scatterer::circle(center, radius)}, k, f, o); });
    const FarFieldSamples ff = global_bie_far_field(g, k, theta);
    if (err.empty()) first = ff;
    err.push_back(compare_far_fields(ff, ref));
    std::printf("nodes %6d  far-field error vs Mie %.3e\n", m, err.back());
  }
  if (mie.truncation_warning()) std::printf("warning: Mie tail %.3e\n", mie.tail_estimate());
  if (!c.out.empty()) {
    ArtifactSet a;
    a.add("mie_farfield.csv", far_field_csv(theta, ref.values, rcs_db(ref.values)));
    a.add("bie_farfield.csv", far_field_csv(theta, first.values, rcs_db(first.values)));
    in_stage("output", [&] { a.write(c.out); });
  }
  const bool ok = err[0] < 1e-8;
  std::printf("%s\n", ok ? "mie-check passed" : "mie-check FAILED");
  return ok ? 0 : 1;
}

// Empty boxes of the configured grid: the merged map must reproduce the
// traces of exterior point sources.
int cmd_merge_check(const Common& c) {
  RunConfig cfg;
  cfg.k = 5.0;
  cfg.grid.cols = cfg.grid.rows = 2;
  cfg.disc.n_per_edge = 128;
  if (!c.config.empty()) cfg = load(c);
  const RtrParams prm = cfg.params();
  const BoxGrid g = make_grid(cfg.grid.origin, cfg.grid.box_width, cfg.grid.box_height, cfg.grid.cols, cfg.grid.rows);
  MergeOptions mo;
  mo.keep_trace_maps = false;
  const MergeTree t = in_stage("elimination", [&] {
    return hierarchical_merge(g, build_leaf_maps(g, cfg.disc, prm), mo);
  });
  const Rect r = g.outer();
  const Vec2 mid = 0.5 * (r.lo + r.hi);
  const std::vector<Vec2> sources = {{r.hi.x() + 1.0, mid.y()},
                                     {mid.x(), r.lo.y() - 1.0},
                                     {r.lo.x() - 1.0, r.hi.y() + 1.0}};
  double worst = 0.0;
  for (const auto& x0 : sources) {
    const RobinData d = point_source_traces(prm.k, x0, t.S_int.nodes, t.S_int.normals, t.S_int.eta);
    const double e = rel_max_error(t.S_int.matrix * d.minus, d.plus);
    worst = std::max(worst, e);
    std::printf("source (%g, %g)  relative error %.3e\n", x0.x(), x0.y(), e);
  }
  std::printf("merges %d  max condition %.3e\n", t.merge_count(), max_of(t.conditions()));
  const bool ok = worst < 1e-6;
  std::printf("%s\n", ok ? "merge-check passed" : "merge-check FAILED");
  return ok ? 0 : 1;
}

int cmd_cloud_gen(const Common& c) {
  const RunConfig cfg = load(c);
  const BoxGrid g = in_stage("geometry", [&] { return cfg.build_grid(); });
  const std::string doc = cloud_json(g).dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << doc;
  } else {
    ArtifactSet a;
    a.add("cloud.json", doc);
    in_stage("output", [&] { a.write(c.out); });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-decomposition solver for 2D multiple scattering by sound-soft obstacles"};
  app.require_subcommand(1);
  Common run_o, mie_o, oracle_o, merge_o, cloud_o;
  auto* run = app.add_subcommand("run", "solve a configuration and write the artifact directory");
  add_common(run, run_o, true, true);
  auto* mie = app.add_subcommand("mie-check", "global BIE against the Mie series for one circle");
  add_common(mie, mie_o, false, false);
  auto* oracle = app.add_subcommand("oracle-compare", "DD far field against the global BIE");
  add_common(oracle, oracle_o, true, false);
  auto* merge = app.add_subcommand("merge-check", "point-source check of the merged RtR map");
  add_common(merge, merge_o, false, false);
  auto* cloud = app.add_subcommand("cloud-gen", "write the cloud as JSON");
  add_common(cloud, cloud_o, true, false);
  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return set_threads(run_o), cmd_run(run_o);
    if (mie->parsed()) return set_threads(mie_o), cmd_mie_check(mie_o);
    if (oracle->parsed()) return set_threads(oracle_o), cmd_oracle_compare(oracle_o);
    if (merge->parsed()) return set_threads(merge_o), cmd_merge_check(merge_o);
    if (cloud->parsed()) return set_threads(cloud_o), cmd_cloud_gen(cloud_o);
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
