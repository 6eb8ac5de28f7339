#pragma once
//
// Configuration-driven pipeline: build the cloud, factor once, solve every
// incidence, and assemble the artifact files.
//

#include <functional>

#include "msdd/config.hpp"
#include "msdd/oracle.hpp"
#include "msdd/output.hpp"
#include "msdd/solve.hpp"

namespace msdd {

/// A failure attributed to one pipeline stage.
struct StageError : Error {
  StageError(std::string stage_name, const std::string& what)
      : Error(stage_name + ": " + what), stage(std::move(stage_name)) {}
  std::string stage;
};

template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

struct RunResult {
  ArtifactSet files;
  json meta;
  std::vector<CVector> far_fields;
  std::vector<double> oracle_errors;
};

/// Interior interfaces in a fixed order: box ascending, then the box's
/// partition order; each shared edge is listed once from its lower box.
struct InterfaceEntry {
  SegmentId a, b;
};

inline std::vector<InterfaceEntry> interior_interfaces(const DDSolver& s) {
  std::vector<InterfaceEntry> out;
  for (int b = 0; b < s.grid().box_count(); ++b)
    for (const auto& seg : s.tree().leaves[b].S.partition.segments) {
      const auto nb = neighbour_segment(s.grid(), seg.id);
      if (nb && nb->box > b) out.push_back({seg.id, *nb});
    }
  return out;
}

inline std::string interfaces_csv(const DDSolver& s, const std::vector<SolveOutput>& outs) {
  const auto faces = interior_interfaces(s);
  std::string csv = "incidence,interface,node,re,im\n";
  for (std::size_t i = 0; i < outs.size(); ++i)
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const PartitionSegment& seg = s.tree().leaves[faces[f].a.box].S.partition.find(faces[f].a);
      const CVector& g = outs[i].leaf_incoming[faces[f].a.box];
      for (int n = 0; n < seg.count; ++n) {
        const cplx v = g[seg.start + n];
        csv += std::to_string(i) + ',' + std::to_string(f) + ',' + std::to_string(n) + ',' +
               fmt17(v.real()) + ',' + fmt17(v.imag()) + '\n';
      }
    }
  return csv;
}

inline json tree_stats(const MergeTree& t) {
  json merges = json::array();
  for (const auto& n : t.internal) {
    std::string face;
    for (const auto& [a, b] : n.record.interface) face += (face.empty() ? "" : " ") + to_string(a) + "|" + to_string(b);
    merges.push_back({{"boxes", n.boxes},
                      {"interface", face},
                      {"interface_size", n.record.interface_size()},
                      {"boundary_size", n.partition.size()},
                      {"condition", n.record.condition},
                      {"seconds", n.seconds}});
  }
  return merges;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

/// Runs the whole pipeline. `progress` receives one line per stage.
inline RunResult run_pipeline(const RunConfig& cfg, const std::function<void(const std::string&)>& progress = {}) {
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  RunResult res;
  in_stage("config", [&] { cfg.validate(); });
  const BoxGrid grid = in_stage("geometry", [&] { return cfg.build_grid(); });
  const RtrParams prm = cfg.params();
  say("geometry: " + std::to_string(grid.box_count()) + " boxes, " + std::to_string(grid.scatterer_count()) +
      " scatterers");

  SolverOptions opt;
  const DDSolver solver = in_stage("factorization", [&] { return DDSolver(grid, cfg.disc, prm, opt); });
  say("factorization: offline " + fmt17(solver.timings().offline) + " s, elimination " +
      fmt17(solver.timings().elimination) + " s");

  const std::vector<double> theta = FarFieldSamples::uniform_angles(cfg.far_field_count);
  FarFieldSamples dirs;
  dirs.angles = theta;
  const std::vector<Vec2> directions = dirs.directions();

  std::vector<SolveOutput> outs;
  json incidences = json::array();
  for (std::size_t i = 0; i < cfg.incidence.size(); ++i) {
    const std::string tag = std::to_string(i);
    const IncidentField f = IncidentField::plane_wave(cfg.k, cfg.incidence[i]);
    SolveOutput out = in_stage("solution", [&] { return solver.solve(f); });
    json inc;
    inc["angle"] = cfg.incidence[i];
    inc["outer_residual"] = out.outer_residual;
    inc["route_a"] = out.route_a;
    inc["route_discrepancy"] = out.route_a ? json(out.route_discrepancy) : json(nullptr);

    in_stage("output", [&] {
      const CVector u = far_field_pattern(solver, out, directions);
      const CVector u_outer = far_field_from_outer(solver, out, directions);
      inc["far_field_max_abs"] = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
      inc["far_field_outer_data_difference"] = (u - u_outer).cwiseAbs().maxCoeff();
      res.files.add("farfield_" + tag + ".csv", far_field_csv(theta, u, rcs_db(u)));
      res.far_fields.push_back(u);

      if (cfg.near_field) {
        const NearFieldSpec& n = *cfg.near_field;
        const double dx = n.nx > 1 ? (n.hi.x() - n.lo.x()) / (n.nx - 1) : 0.0;
        const double dy = n.ny > 1 ? (n.hi.y() - n.lo.y()) / (n.ny - 1) : 0.0;
        const auto pts = grid_points(n.nx, n.ny, n.lo.x(), n.lo.y(), dx, dy);
        const FieldResult r = eval_total_field(solver, out, pts);
        inc["near_field_nan_points"] = r.near_points.size();
        res.files.add("nearfield_" + tag + ".grid", grid_file(n.nx, n.ny, n.lo.x(), n.lo.y(), dx, dy, r.values));
      }
      if (!cfg.probes.empty()) {
        const FieldResult r = eval_total_field(solver, out, cfg.probes);
        std::string csv = "x,y,re,im,abs\n";
        for (std::size_t p = 0; p < cfg.probes.size(); ++p) {
          const cplx v = r.values[static_cast<Eigen::Index>(p)];
          csv += fmt17(cfg.probes[p].x()) + ',' + fmt17(cfg.probes[p].y()) + ',' + fmt17(v.real()) + ',' +
                 fmt17(v.imag()) + ',' + fmt17(std::abs(v)) + '\n';
        }
        inc["probe_nan_points"] = r.near_points.size();
        res.files.add("probes_" + tag + ".csv", csv);
      }
    });

    if (cfg.oracle.enabled) {
      GlobalBieOptions go;
      go.n_per_scatterer = cfg.oracle.n_per_scatterer;
      go.unknown_budget = cfg.oracle.unknown_budget;
      const auto cloud = flatten_cloud(grid);
      FarFieldSamples ref;
      ref.angles = theta;
      json o;
      if (cloud.empty()) {
        ref.values = CVector::Zero(static_cast<Eigen::Index>(theta.size()));
        o["unknowns"] = 0;
      } else {
        const GlobalBieResult g = in_stage("oracle", [&] { return global_bie_solve(cloud, cfg.k, f, go); });
        ref = global_bie_far_field(g, cfg.k, theta);
        o["unknowns"] = g.unknowns;
        o["condition"] = g.condition;
        o["seconds"] = g.seconds;
      }
      FarFieldSamples mine;
      mine.angles = theta;
      mine.values = res.far_fields.back();
      const double scale = ref.values.size() ? ref.values.cwiseAbs().maxCoeff() : 0.0;
      const double err = scale > 0.0 ? compare_far_fields(mine, ref)
                                     : (mine.values.size() ? mine.values.cwiseAbs().maxCoeff() : 0.0);
      o["far_field_error"] = err;
      res.oracle_errors.push_back(err);
      inc["oracle"] = o;
      res.files.add("oracle_farfield_" + tag + ".csv", far_field_csv(theta, ref.values, rcs_db(ref.values)));
    }
    say("incidence " + tag + ": angle " + fmt17(cfg.incidence[i]) + ", outer residual " +
        fmt17(out.outer_residual));
    incidences.push_back(inc);
    outs.push_back(std::move(out));
  }
  in_stage("output", [&] { res.files.add("interfaces.csv", interfaces_csv(solver, outs)); });

  // Metadata. Only meta.json carries timings; every other file is a pure
  // function of the configuration.
  json m;
  m["schema_version"] = kConfigSchemaVersion;
  const auto faces = interior_interfaces(solver);
  json face_names = json::array();
  for (const auto& f : faces) face_names.push_back(to_string(f.a) + "|" + to_string(f.b));
  int scatterer_unknowns = 0;
  for (const auto& v : solver.scatterer_meshes())
    for (const auto& mesh : v) scatterer_unknowns += mesh.size();
  m["sizes"] = {{"boxes", grid.box_count()},
                {"scatterers", grid.scatterer_count()},
                {"scatterer_unknowns", scatterer_unknowns},
                {"box_boundary_nodes", solver.tree().leaves.empty() ? 0 : solver.tree().leaves[0].S.size()},
                {"outer_nodes", solver.outer_mesh().size()},
                {"interfaces", faces.size()},
                {"merges", solver.tree().merge_count()},
                {"far_field_count", cfg.far_field_count}};
  m["interfaces"] = face_names;
  const StageTimings& t = solver.timings();
  m["timings"] = {{"offline", t.offline}, {"elimination", t.elimination}, {"solution", t.solution}};
  m["offline_stages"] = 1;
  m["factorizations"] = solver.factorization_count();
  std::vector<double> leaf_c;
  for (const auto& l : solver.tree().leaves) leaf_c.push_back(l.condition);
  m["conditions"] = {{"leaf_max", max_of(leaf_c)},
                     {"merge_max", max_of(solver.tree().conditions())},
                     {"exterior", solver.exterior_condition()},
                     {"outer_system", solver.outer_system().condition()}};
  m["merge_tree"] = tree_stats(solver.tree());
  m["incidences"] = incidences;
  m["config"] = to_json(cfg);
  m["files"] = res.files.hashes();
  m["content_hash"] = res.files.content_hash();
  res.meta = m;
  res.files.add("meta.json", m.dump(2) + "\n");
  return res;
}

}  // namespace msdd
