// Command-line front end: numbered experiments, subspace build/validate,
// sensor reconstruction, and moment diagnostics, all emitting JSON on
// stdout and CSV artifacts on disk.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "snapspan/experiments.hpp"
#include "snapspan/moments.hpp"
#include "snapspan/widder.hpp"

namespace {

using namespace snapspan;

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("bad JSON in " + path + ": " + e.what());
  }
}

std::vector<double> read_number_column(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read: " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const double x = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw io_error("not a number in " + path + ": " + line);
    out.push_back(x);
  }
  if (out.empty()) throw io_error("no values in " + path);
  return out;
}

ModeIndex parse_mode(const EigenFamily& fam, const std::string& spec) {
  if (fam.kind() == FamilyKind::periodic_1d) {
    if (spec == "const") return ModeIndex::periodic_constant();
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
      const std::string branch = spec.substr(0, colon);
      const int n = std::stoi(spec.substr(colon + 1));
      if (branch == "sin") return ModeIndex::periodic_sine(n);
      if (branch == "cos") return ModeIndex::periodic_cosine(n);
      throw config_error("periodic mode spec: const, sin:n, or cos:n");
    }
    throw config_error("periodic mode spec: const, sin:n, or cos:n");
  }
  const auto comma = spec.find(',');
  if (fam.dimension() == 2) {
    if (comma == std::string::npos)
      throw config_error("2D mode spec needs two indices, e.g. 2,3");
    return ModeIndex::d2(std::stoi(spec.substr(0, comma)),
                         std::stoi(spec.substr(comma + 1)));
  }
  if (comma != std::string::npos)
    throw config_error("1D mode spec takes a single index");
  return ModeIndex::d1(std::stoi(spec));
}

ExponentSequence sequence_from_flags(const std::string& family,
                                     const std::string& mu_json, bool shifted,
                                     int count) {
  if (shifted) return ExponentSequence::shifted_integers(count);
  if (!mu_json.empty()) {
    ExponentSequence e = ExponentSequence::from_json(read_json_file(mu_json));
    return e;
  }
  return ExponentSequence::from_family(detail::family_from_string(family), count);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"span tests for snapshots of linear evolution solutions"};
  app.require_subcommand(1);
  int status = 0;

  // experiment <1..6|custom>
  auto* exp_cmd = app.add_subcommand("experiment", "run a numbered experiment pipeline");
  std::string exp_id, exp_config, exp_out;
  std::uint64_t exp_seed = 0;
  bool exp_seed_set = false, exp_paper = false;
  exp_cmd->add_option("id", exp_id, "1..6 or custom")->required();
  exp_cmd->add_option("--config", exp_config, "JSON config overlay");
  exp_cmd->add_option("--out", exp_out, "output directory");
  exp_cmd->add_option("--seed", exp_seed, "master seed")
      ->each([&](const std::string&) { exp_seed_set = true; });
  exp_cmd->add_flag("--paper-scale", exp_paper, "restore publication-scale parameters");
  exp_cmd->callback([&] {
    int id = 0;
    if (exp_id != "custom") {
      try {
        id = std::stoi(exp_id);
      } catch (const std::exception&) {
        throw config_error("experiment id must be 1..6 or custom");
      }
    }
    ExperimentConfig cfg = ExperimentConfig::defaults_for(id);
    if (!exp_config.empty()) cfg.apply_json(read_json_file(exp_config));
    if (exp_seed_set) {
      cfg.seed = exp_seed;
      cfg.seed_set = true;
    }
    if (exp_paper) cfg.apply_paper_scale();
    if (!exp_out.empty()) cfg.out_dir = exp_out;
    const Report rep = run_experiment(cfg);
    print_json(rep.to_json(true));
  });

  // subspace build | validate
  auto* sub_cmd = app.add_subcommand("subspace", "build or validate a span subspace");
  sub_cmd->require_subcommand(1);

  auto* build_cmd = sub_cmd->add_subcommand("build", "assemble snapshots and extract the subspace");
  std::string build_config, build_out;
  std::uint64_t build_seed = 0;
  bool build_seed_set = false;
  build_cmd->add_option("--config", build_config, "JSON config")->required();
  build_cmd->add_option("--out", build_out, "output directory");
  build_cmd->add_option("--seed", build_seed, "master seed")
      ->each([&](const std::string&) { build_seed_set = true; });
  build_cmd->callback([&] {
    nlohmann::json j = read_json_file(build_config);
    j.erase("experiment");
    ExperimentConfig cfg = ExperimentConfig::defaults_for(0);
    cfg.apply_json(j);
    if (build_seed_set) {
      cfg.seed = build_seed;
      cfg.seed_set = true;
    }
    if (!build_out.empty()) cfg.out_dir = build_out;
    const Report rep = run_table_experiment(cfg);
    print_json(rep.to_json(true));
  });

  auto* val_cmd = sub_cmd->add_subcommand("validate", "projection error of a field against a stored subspace");
  std::string val_subspace, val_family = "dirichlet1d", val_mode, val_field_csv;
  double val_tau = 0.1, val_tol = 1e-10;
  val_cmd->add_option("--subspace", val_subspace, "subspace CSV (with .meta.json sidecar)")->required();
  val_cmd->add_option("--family", val_family, "eigenfamily of the test mode");
  val_cmd->add_option("--mode", val_mode, "mode spec: n | m,n | sin:n | cos:n | const");
  val_cmd->add_option("--field-csv", val_field_csv, "node values, one per line");
  val_cmd->add_option("--tau", val_tau, "snapshot time for the eigenmode field");
  val_cmd->add_option("--tolerance", val_tol, "pass threshold on eta");
  val_cmd->callback([&] {
    const Subspace v = load_subspace(val_subspace);
    Eigen::VectorXd field;
    if (!val_field_csv.empty()) {
      const std::vector<double> vals = read_number_column(val_field_csv);
      if (static_cast<Eigen::Index>(vals.size()) != v.grid.weights.size())
        throw config_error("field length does not match the subspace grid");
      field = Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                                static_cast<Eigen::Index>(vals.size()));
    } else if (!val_mode.empty()) {
      const EigenFamily fam = detail::family_from_string(val_family);
      const ModeIndex idx = parse_mode(fam, val_mode);
      field = mode_field(fam, idx, v.grid) * std::exp(-fam.eigenvalue(idx) * val_tau);
    } else {
      throw config_error("validate needs --mode or --field-csv");
    }
    const double eta = relative_error(v, field);
    print_json({{"eta", eta}, {"tolerance", val_tol}, {"pass", eta <= val_tol}});
    if (!(eta <= val_tol)) status = 1;
  });

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "least-squares field recovery from sensor readings");
  std::string rec_subspace, rec_readings, rec_sensor_csv, rec_out;
  int rec_sensor_count = 0;
  double rec_rcond = 1e-6;
  bool rec_allow = false;
  rec_cmd->add_option("--subspace", rec_subspace, "subspace CSV")->required();
  rec_cmd->add_option("--readings", rec_readings, "sensor readings, one per line")->required();
  rec_cmd->add_option("--sensor-count", rec_sensor_count, "uniform interior sensors");
  rec_cmd->add_option("--sensor-csv", rec_sensor_csv, "sensor positions, one per line");
  rec_cmd->add_option("--rcond", rec_rcond, "relative singular value cutoff");
  rec_cmd->add_flag("--allow-rank-deficient", rec_allow, "truncated min-norm solve instead of an error");
  rec_cmd->add_option("--out", rec_out, "write the recovered field CSV here");
  rec_cmd->callback([&] {
    const Subspace v = load_subspace(rec_subspace);
    SensorSet sensors;
    if (!rec_sensor_csv.empty())
      sensors.positions = read_number_column(rec_sensor_csv);
    else if (rec_sensor_count > 0)
      sensors = SensorSet::uniform_interior(rec_sensor_count);
    else
      throw config_error("reconstruct needs --sensor-count or --sensor-csv");
    const std::vector<double> yv = read_number_column(rec_readings);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(
        yv.data(), static_cast<Eigen::Index>(yv.size()));
    const Reconstruction rec =
        reconstruct_from_sensors(v, sensors, y, {rec_rcond, rec_allow});
    if (rec.rank_warning)
      std::cerr << "warning: underdetermined fit (sensors or rank below subspace dimension)\n";
    std::vector<double> coeffs(rec.coefficients.data(),
                               rec.coefficients.data() + rec.coefficients.size());
    print_json({{"coefficients", coeffs},
                {"rms_residual", rec.rms_residual},
                {"effective_rank", rec.effective_rank},
                {"rank_warning", rec.rank_warning}});
    if (!rec_out.empty()) {
      std::string csv;
      for (Eigen::Index i = 0; i < rec.field.size(); ++i)
        csv += format_double(rec.field[i]) + "\n";
      detail::write_text(rec_out, csv);
    }
  });

  // moments <dn|biorth|widder|zeta|gap>
  auto* mom_cmd = app.add_subcommand("moments", "exponential moment problem diagnostics");
  mom_cmd->require_subcommand(1);

  auto* dn_cmd = mom_cmd->add_subcommand("dn", "distance from an eigenmode to the closure of the others");
  std::string dn_family = "dirichlet1d", dn_mu_json, dn_method = "product";
  bool dn_shifted = false, dn_no_tail = false;
  int dn_n = 1, dn_count = 12, dn_digits = 80;
  long dn_terms = 2000;
  double dn_horizon = std::numeric_limits<double>::infinity();
  dn_cmd->add_option("--family", dn_family, "eigenfamily supplying the exponents");
  dn_cmd->add_option("--mu-json", dn_mu_json, "JSON {\"eigenvalues\": [...]}");
  dn_cmd->add_flag("--shifted", dn_shifted, "use mu_n = n - 1/2");
  dn_cmd->add_option("--n", dn_n, "mode index");
  dn_cmd->add_option("--method", dn_method, "product | gram");
  dn_cmd->add_option("--terms", dn_terms, "product truncation J");
  dn_cmd->add_flag("--no-tail", dn_no_tail, "skip the analytic product tail");
  dn_cmd->add_option("--count", dn_count, "exponent prefix length for the Gram solve");
  dn_cmd->add_option("--digits", dn_digits, "working precision for the Gram solve");
  dn_cmd->add_option("--horizon", dn_horizon, "finite time horizon T (default infinite)");
  dn_cmd->callback([&] {
    const int need = dn_method == "gram"
                         ? dn_count
                         : std::max(dn_n + 1, static_cast<int>(dn_terms));
    const ExponentSequence e =
        sequence_from_flags(dn_family, dn_mu_json, dn_shifted, need);
    double value = 0.0;
    if (dn_method == "gram")
      value = dn_gram(e, dn_n, dn_horizon, dn_digits);
    else if (dn_method == "product")
      value = dn_infinity_product(e, dn_n, dn_terms,
                                  dn_no_tail ? TailMode::none : TailMode::analytic);
    else
      throw config_error("method must be product or gram");
    print_json({{"n", dn_n}, {"method", dn_method}, {"value", value}});
  });

  auto* bi_cmd = mom_cmd->add_subcommand("biorth", "finite-section biorthogonal norm");
  std::string bi_family = "dirichlet1d", bi_mu_json;
  bool bi_shifted = false;
  int bi_n = 1, bi_count = 12;
  bi_cmd->add_option("--family", bi_family, "eigenfamily supplying the exponents");
  bi_cmd->add_option("--mu-json", bi_mu_json, "JSON {\"eigenvalues\": [...]}");
  bi_cmd->add_flag("--shifted", bi_shifted, "use mu_n = n - 1/2");
  bi_cmd->add_option("--n", bi_n, "mode index");
  bi_cmd->add_option("--count", bi_count, "section size N");
  bi_cmd->callback([&] {
    const ExponentSequence e =
        sequence_from_flags(bi_family, bi_mu_json, bi_shifted, bi_count);
    const BiorthNorm b = finite_biorth_norm(e, bi_n, bi_count);
    print_json({{"n", bi_n},
                {"N", bi_count},
                {"value", b.value},
                {"log_value", b.log_value}});
  });

  auto* wid_cmd = mom_cmd->add_subcommand("widder", "Widder coefficient table and uniform bound check");
  std::string wid_rule = "harmonic", wid_moments_json;
  int wid_kmax = 25, wid_count = -1;
  double wid_tau = 1.0, wid_p = 1.0;
  bool wid_force = false;
  wid_cmd->add_option("--rule", wid_rule, "harmonic | witness");
  wid_cmd->add_option("--moments-json", wid_moments_json, "JSON {\"moments\": [...]}");
  wid_cmd->add_option("--kmax", wid_kmax, "largest table row");
  wid_cmd->add_option("--count", wid_count, "moment count (default kmax + 1)");
  wid_cmd->add_option("--tau", wid_tau, "witness time parameter");
  wid_cmd->add_option("--p", wid_p, "witness growth parameter");
  wid_cmd->add_flag("--force-fp", wid_force, "allow floating point beyond k = 12");
  wid_cmd->callback([&] {
    const int count = wid_count > 0 ? wid_count : wid_kmax + 1;
    MomentSequence m;
    if (!wid_moments_json.empty())
      m = MomentSequence::from_json(read_json_file(wid_moments_json));
    else if (wid_rule == "harmonic")
      m = MomentSequence::harmonic(count);
    else if (wid_rule == "witness")
      m = MomentSequence::witness(wid_tau, wid_p, count);
    else
      throw config_error("rule must be harmonic or witness");
    print_json(widder_table(m, wid_kmax, wid_force).to_json());
  });

  auto* zeta_cmd = mom_cmd->add_subcommand("zeta", "normalization constant zeta0(beta)");
  double zeta_beta = 2.0;
  zeta_cmd->add_option("--beta", zeta_beta, "growth exponent, must exceed 1");
  zeta_cmd->callback([&] {
    print_json({{"beta", zeta_beta}, {"zeta0", zeta0(zeta_beta)}});
  });

  auto* gap_cmd = mom_cmd->add_subcommand("gap", "eigenvalue gap scan below a cutoff");
  std::string gap_family = "rect2d";
  double gap_cutoff = 400.0 * pi * pi;
  gap_cmd->add_option("--family", gap_family, "eigenfamily to scan");
  gap_cmd->add_option("--cutoff", gap_cutoff, "upper eigenvalue bound");
  gap_cmd->callback([&] {
    const EigenFamily fam = detail::family_from_string(gap_family);
    print_json(gap_check(fam, gap_cutoff).to_json());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const snapspan::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  }
  return status;
}
