// Command-line driver: configuration-driven simulation, centerline recovery,
// and stability certification for intrinsic beam models.
//
// Subcommands: simulate | reconstruct | certify | certify-network | info.
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 certificate verdict negative.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "igeb/igeb.hpp"

namespace fs = std::filesystem;
using namespace igeb;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

json load_doc(const CommonOpts& o) {
  json doc = json::object();
  if (!o.config_path.empty()) doc = json::parse(read_text_file(o.config_path));
  for (const std::string& s : o.overrides) apply_override(doc, s);
  return doc;
}

RunConfig load_config(const CommonOpts& o) {
  RunConfig cfg = parse_config(load_doc(o));
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  return cfg;
}

std::string num(double v) { return format_double(v); }

std::string vec_line(const VecX& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += num(v(i));
  }
  return s;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Initial node frames: the curved-arc presets start on the analytic arc,
// everything else starts on the straight reference line.
bool helix_start(const RunConfig& cfg) {
  return cfg.initial_preset.rfind("helix", 0) == 0;
}

std::vector<Vec3> initial_positions(const RunConfig& cfg, const Mesh& mesh) {
  std::vector<Vec3> p0;
  for (int a = 0; a < mesh.node_count(); ++a) {
    const double x = mesh.node_x(a);
    p0.push_back(helix_start(cfg) ? helix_position(x) : Vec3(x, 0.0, 0.0));
  }
  return p0;
}

std::vector<Mat3> initial_rotations(const RunConfig& cfg, const Mesh& mesh) {
  std::vector<Mat3> r0;
  for (int a = 0; a < mesh.node_count(); ++a) {
    const double x = mesh.node_x(a);
    r0.push_back(helix_start(cfg) ? helix_rotation(x) : Mat3::Identity());
  }
  return r0;
}

json interior_json(const InteriorConditions& ic) {
  json j;
  j["min_eig_Qbar"] = ic.min_eig_Qbar;
  j["max_asym_QbarA"] = ic.max_asym_QbarA;
  j["max_eig_Sbar"] = ic.max_eig_Sbar;
  j["Sbar_scale"] = ic.Sbar_scale;
  j["positivity_ok"] = ic.positivity_ok;
  j["symmetry_ok"] = ic.symmetry_ok;
  j["dissipation_ok"] = ic.dissipation_ok;
  return j;
}

int cmd_simulate(const RunConfig& cfg) {
  const BeamParameters p = make_params(cfg);
  const Mesh mesh = make_mesh(cfg);
  const TimeGrid grid = make_grid(cfg);
  const Mat6 k_fb = make_feedback(cfg.feedback, p, p.length);
  const VecX y0 = make_initial(cfg, p, mesh, k_fb);
  const Trajectory traj = simulate(p, mesh, grid, k_fb, y0, cfg.newton);

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  const std::vector<double> e = energy(traj);

  json meta;
  meta["config"] = serialize_config(cfg);
  meta["dof_count"] = traj.system->dof_count;
  int max_it = 0;
  double max_res = 0.0;
  for (int it : traj.newton_iters) max_it = std::max(max_it, it);
  for (double r : traj.residuals) max_res = std::max(max_res, r);
  meta["newton"]["max_iterations"] = max_it;
  meta["newton"]["max_residual"] = max_res;
  meta["energy"]["initial"] = e.front();
  meta["energy"]["final"] = e.back();
  meta["velocity_ramp"] =
      "compatible-velocity preset interpolates with the cubic Hermite ramp "
      "xi*xi*(3-2*xi): zero at the clamped end, matching the boundary "
      "velocity at x=ell, zero slope at both endpoints";
  json files = json::object();
  if (cfg.write_states) {
    write_states_csv((dir / "states.csv").string(), traj);
    files["states"] = "states.csv";
  }
  if (cfg.write_energy) {
    write_series_csv((dir / "energy.csv").string(), grid, {"energy"}, {e});
    files["energy"] = "energy.csv";
  }
  if (cfg.write_frames) {
    const FrameField tf =
        reconstruct_time(traj, initial_positions(cfg, mesh),
                         initial_rotations(cfg, mesh), mesh, grid);
    write_frames_csv((dir / "frames_time.csv").string(), tf, mesh, grid);
    files["frames_time"] = "frames_time.csv";
  }
  meta["files"] = files;
  write_text_file((dir / "run_meta.json").string(), meta.dump(2) + "\n");

  std::cout << "simulate: " << grid.steps << " steps, " << mesh.elements
            << " elements, " << traj.system->dof_count << " unknowns\n";
  std::cout << "energy: " << num(e.front()) << " -> " << num(e.back())
            << " (ratio " << num(e.back() / e.front()) << ")\n";
  std::cout << "newton: worst " << max_it << " iterations, final residual "
            << num(max_res) << "\n";
  std::cout << "wrote " << (dir / "run_meta.json").string() << "\n";
  return 0;
}

int cmd_reconstruct(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  const fs::path states_path = dir / "states.csv";
  if (!fs::exists(states_path))
    throw ParameterError("reconstruct: missing state series '" +
                         states_path.string() + "' (run simulate first)");

  const BeamParameters p = make_params(cfg);
  const Mesh mesh = make_mesh(cfg);
  const TimeGrid grid = make_grid(cfg);
  const Mat6 k_fb = make_feedback(cfg.feedback, p, p.length);

  Trajectory traj;
  traj.grid = grid;
  traj.system =
      std::make_shared<AssembledSystem>(assemble(p, mesh, k_fb));
  traj.states = read_states_csv(states_path.string(), mesh, grid.steps);
  traj.newton_iters.assign(grid.steps - 1, 0);
  traj.residuals.assign(grid.steps - 1, 0.0);

  const std::vector<Vec3> p0 = initial_positions(cfg, mesh);
  const std::vector<Mat3> r0 = initial_rotations(cfg, mesh);
  const bool want_time =
      cfg.reconstruct_method == "time" || cfg.reconstruct_method == "both";
  const bool want_space =
      cfg.reconstruct_method == "space" || cfg.reconstruct_method == "both";

  FrameField tf(0, 0), sf(0, 0);
  if (want_time) {
    tf = reconstruct_time(traj, p0, r0, mesh, grid);
    write_frames_csv((dir / "frames_time.csv").string(), tf, mesh, grid);
    std::cout << "wrote " << (dir / "frames_time.csv").string() << "\n";
  }
  if (want_space) {
    sf = reconstruct_space_all(traj, p0.front(), r0.front());
    write_frames_csv((dir / "frames_space.csv").string(), sf, mesh, grid);
    std::cout << "wrote " << (dir / "frames_space.csv").string() << "\n";
  }
  if (want_time && want_space) {
    const auto [dp, dr] = frame_field_difference(tf, sf);
    std::cout << "cross-method sup difference: position " << num(dp)
              << ", rotation " << num(dr) << "\n";
    json meta = json::object();
    const fs::path meta_path = dir / "run_meta.json";
    if (fs::exists(meta_path)) meta = json::parse(read_text_file(meta_path.string()));
    meta["reconstruct"]["position_sup_difference"] = dp;
    meta["reconstruct"]["rotation_sup_difference"] = dr;
    write_text_file(meta_path.string(), meta.dump(2) + "\n");
  }
  return 0;
}

int cmd_certify(const RunConfig& cfg) {
  const LyapunovCertificate cert = make_certificate(cfg);

  std::cout << "variant: " << to_string(cert.variant) << "\n";
  std::cout << "rho: " << num(cert.rho) << "\n";
  std::cout << "state positivity margin (min eig Qbar): "
            << num(cert.interior.min_eig_Qbar) << "\n";
  std::cout << "interior dissipation margin (-max eig Sbar): "
            << num(-cert.interior.max_eig_Sbar) << "\n";
  std::cout << "weight at clamped end: " << num(cert.w_at_start) << "\n";
  std::cout << "boundary margin (-max eig mu): " << num(-cert.max_eig_mu)
            << "\n";
  std::cout << "constants: C_lambda " << num(cert.constants.C_lambda)
            << ", C_xi " << num(cert.constants.C_xi) << ", C_theta "
            << num(cert.constants.C_theta) << ", C_mu "
            << num(cert.constants.C_mu) << ", eta " << num(cert.constants.eta)
            << ", chi " << num(cert.constants.chi) << "\n";
  std::cout << "verdict: " << (cert.verdict ? "pass" : "fail");
  if (!cert.verdict) std::cout << " (condition '" << cert.failed << "')";
  std::cout << "\n";

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    json rep;
    rep["verdict"] = cert.verdict;
    rep["failed"] = cert.failed;
    rep["rho"] = cert.rho;
    rep["variant"] = to_string(cert.variant);
    rep["interior"] = interior_json(cert.interior);
    rep["w_at_start"] = cert.w_at_start;
    rep["max_eig_mu"] = cert.max_eig_mu;
    rep["boundary_ok"] = cert.boundary_ok;
    rep["constants"]["C_lambda"] = cert.constants.C_lambda;
    rep["constants"]["C_xi"] = cert.constants.C_xi;
    rep["constants"]["C_theta"] = cert.constants.C_theta;
    rep["constants"]["C_mu"] = cert.constants.C_mu;
    rep["constants"]["eta"] = cert.constants.eta;
    rep["constants"]["chi"] = cert.constants.chi;
    rep["feedback"] = mat_json(cert.K);
    const fs::path out = fs::path(cfg.out_dir) / "certificate.json";
    write_text_file(out.string(), rep.dump(2) + "\n");
    std::cout << "wrote " << out.string() << "\n";
  }
  return cert.verdict ? 0 : 4;
}

int cmd_certify_network(const RunConfig& cfg) {
  const StarCertificate sc = star_certificate(make_star(cfg));

  std::cout << "beams: " << cfg.network.count << ", rho: "
            << num(cfg.network.rho) << "\n";
  for (size_t i = 0; i < sc.interior.size(); ++i) {
    const InteriorConditions& ic = sc.interior[i];
    std::cout << "beam " << i << " interior: min eig Qbar "
              << num(ic.min_eig_Qbar) << ", max eig Sbar "
              << num(ic.max_eig_Sbar) << " -> "
              << (ic.positivity_ok && ic.dissipation_ok ? "ok" : "FAIL")
              << "\n";
  }
  for (size_t i = 0; i < sc.nodes.size(); ++i) {
    const NodalCertificate& nc = sc.nodes[i];
    std::cout << "node " << sc.node_names[i] << " (" << to_string(nc.kind)
              << "): max eig " << num(nc.max_eig_M);
    if (nc.kind == NodeKind::simple_controlled)
      std::cout << ", controlled margin " << num(nc.controlled_margin);
    std::cout << " -> " << (nc.ok ? "ok" : "FAIL") << "\n";
  }
  std::cout << "verdict: " << (sc.verdict ? "pass" : "fail");
  if (!sc.verdict) std::cout << " (" << sc.failed << ")";
  std::cout << "\n";

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    json rep;
    rep["verdict"] = sc.verdict;
    rep["failed"] = sc.failed;
    rep["rho"] = cfg.network.rho;
    rep["beams"] = cfg.network.count;
    json interiors = json::array();
    for (const InteriorConditions& ic : sc.interior)
      interiors.push_back(interior_json(ic));
    rep["interior"] = interiors;
    json nodes = json::array();
    for (size_t i = 0; i < sc.nodes.size(); ++i) {
      json nj;
      nj["name"] = sc.node_names[i];
      nj["kind"] = to_string(sc.nodes[i].kind);
      nj["max_eig"] = sc.nodes[i].max_eig_M;
      nj["controlled_margin"] = sc.nodes[i].controlled_margin;
      nj["ok"] = sc.nodes[i].ok;
      nodes.push_back(nj);
    }
    rep["nodes"] = nodes;
    const fs::path out = fs::path(cfg.out_dir) / "network_certificate.json";
    write_text_file(out.string(), rep.dump(2) + "\n");
    std::cout << "wrote " << out.string() << "\n";
  }
  return sc.verdict ? 0 : 4;
}

int cmd_info(const RunConfig& cfg) {
  const BeamParameters p = make_params(cfg);
  std::cout << "length: " << num(p.length) << "\n";
  std::cout << "mass diagonal: " << vec_line(p.mass_matrix.diagonal()) << "\n";
  std::cout << "flexibility diagonal: "
            << vec_line(p.flexibility_matrix.diagonal()) << "\n";
  std::cout << "precurvature: " << vec_line(p.precurvature_vector) << "\n";

  const Diagonalization dg = diagonalize(p, 0.0);
  std::cout << "wave speeds: " << vec_line(dg.D.diagonal()) << "\n";

  const auto [a_mat, bbar] = build_A_Bbar(p, 0.0);
  (void)a_mat;
  const Eigen::JacobiSVD<Mat12> svd(bbar);
  std::cout << "|B_bar| (spectral): " << num(svd.singularValues()(0)) << "\n";

  const Mat6 kt = transparent_K(p, 0.0);
  std::cout << "transparent feedback K:\n";
  for (int i = 0; i < 6; ++i)
    std::cout << "  " << vec_line(kt.row(i).transpose()) << "\n";
  try {
    const auto [mu1, mu2] = near_transparent_mu(p, 0.0);
    std::cout << "near-transparent gains: mu1 " << num(mu1) << ", mu2 "
              << num(mu2) << "\n";
  } catch (const UnsupportedError&) {
    std::cout << "near-transparent gains: require diagonal mass and "
                 "flexibility\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("IGEB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }

  CLI::App app{
      "Intrinsic beam dynamics: simulation, centerline recovery, and "
      "stability certificates"};
  app.require_subcommand(1);
  CommonOpts opts;

  const auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path,
                    "Path to a JSON run configuration (defaults apply "
                    "without it)");
    sub->add_option("--out", opts.out_dir,
                    "Output directory (overrides the configured one)");
    sub->add_option("--override", opts.overrides,
                    "Dotted-path override KEY=VALUE (repeatable)");
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "Integrate the beam and write state/energy series");
  CLI::App* rec = app.add_subcommand(
      "reconstruct", "Recover centerline frames from a written state series");
  CLI::App* cert = app.add_subcommand(
      "certify", "Build and check a single-beam stability certificate");
  CLI::App* certnet = app.add_subcommand(
      "certify-network", "Check a star-network stability certificate");
  CLI::App* info =
      app.add_subcommand("info", "Print model summary for the configured beam");
  for (CLI::App* sub : {sim, rec, cert, certnet, info}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const RunConfig cfg = load_config(opts);
    if (sim->parsed()) return cmd_simulate(cfg);
    if (rec->parsed()) return cmd_reconstruct(cfg);
    if (cert->parsed()) return cmd_certify(cfg);
    if (certnet->parsed()) return cmd_certify_network(cfg);
    return cmd_info(cfg);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
