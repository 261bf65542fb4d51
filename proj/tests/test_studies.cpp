#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "honls/spectral.hpp"
#include "honls/studies.hpp"

using namespace honls;

namespace {

StudyConfig cubic_1d_config() {
  StudyConfig cfg;
  cfg.dim = 1;
  cfg.n = 256;
  cfg.box = 30.0;
  cfg.nonlinearity = "power";
  cfg.k = 1;
  cfg.symbol = "radial";
  cfg.radial_terms = {{2, 1.0}};
  cfg.grad_tol = 1e-11;
  return cfg;
}

double radial_defect(const Field& u) {
  Field s = symmetrize_radial(u);
  Field uf = ensure_space(u, Space::physical);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < uf.size(); ++i) {
    num += std::norm(uf[i] - s[i]);
    den += std::norm(uf[i]);
  }
  return std::sqrt(num / den);
}

} // namespace

TEST_CASE("study kind names round-trip") {
  for (StudyKind k :
       {StudyKind::groundstate, StudyKind::contraction, StudyKind::spectrum,
        StudyKind::eps_sweep, StudyKind::c_sweep, StudyKind::verify})
    CHECK(parse_study_kind(study_kind_name(k)) == k);
  CHECK_THROWS_AS(parse_study_kind("sweep"), std::invalid_argument);
}

TEST_CASE("config parser reads sections, arrays, and comments") {
  const std::string text = R"(# run configuration
kind = eps_sweep

[problem]
dim = 2
n = 64            # grid points per axis
box = 25.5
nonlinearity = power
k = 2
symbol = radial
eps = 0.125
radial_terms = [[2, 1.0], [3, 0.25]]
aniso_terms = [[4, 0, 0, 1.5], [2, 2, 0, 0.5]]
mass = 2
light_speed = 8
J = 3

[solver]
grad_tol = 1e-9
seed = 987654321
workers = 2

[sweep]
eps_list = [0, 0.01, 0.1]
J_list = [1, 3]

[output]
out_dir = "runs/a b"
write_fields = true
)";
  StudyConfig cfg = parse_study_config(text);
  CHECK(cfg.kind == StudyKind::eps_sweep);
  CHECK(cfg.dim == 2);
  CHECK(cfg.n == 64);
  CHECK(cfg.box == 25.5);
  CHECK(cfg.k == 2);
  CHECK(cfg.eps == 0.125);
  REQUIRE(cfg.radial_terms.size() == 2);
  CHECK(cfg.radial_terms[1].order == 3);
  CHECK(cfg.radial_terms[1].coeff == 0.25);
  REQUIRE(cfg.aniso_terms.size() == 2);
  CHECK(cfg.aniso_terms[0].alpha == std::array<int, 3>{4, 0, 0});
  CHECK(cfg.aniso_terms[1].coeff == 0.5);
  CHECK(cfg.mass == 2.0);
  CHECK(cfg.light_speed == 8.0);
  CHECK(cfg.J == 3);
  CHECK(cfg.grad_tol == 1e-9);
  CHECK(cfg.seed == 987654321ull);
  CHECK(cfg.workers == 2);
  REQUIRE(cfg.eps_list.size() == 3);
  CHECK(cfg.eps_list[2] == 0.1);
  CHECK(cfg.J_list == std::vector<int>{1, 3});
  CHECK(cfg.out_dir == "runs/a b");
  CHECK(cfg.write_fields);
  // untouched keys keep their defaults
  CHECK(cfg.max_iters == 5000);
  CHECK(cfg.lattice_n == 128);
}

TEST_CASE("config parser rejects malformed input with line numbers") {
  auto expect_fail = [](const std::string& text, const std::string& needle) {
    try {
      parse_study_config(text);
      FAIL_CHECK("expected a parse error for: " << text);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_fail("\n\n[problem]\nn = 64\nwhat = 1\n", "line 5");
  expect_fail("[problem]\nwhat = 1\n", "unknown key 'what'");
  expect_fail("[nowhere]\n", "unknown section");
  expect_fail("[problem]\nn = 64\n\nn = 32\n", "duplicate key");
  expect_fail("[problem]\nn\n", "expected key = value");
  expect_fail("[problem]\nn = twelve\n", "expected an integer");
  expect_fail("[problem]\nbox = 1.2.3\n", "expected a number");
  expect_fail("[output]\nwrite_fields = yes\n", "expected true or false");
  expect_fail("[sweep]\neps_list = [0.1, [0.2]\n", "unbalanced brackets");
  expect_fail("[sweep]\neps_list = 0.1\n", "expected an array");
  expect_fail("[problem]\nradial_terms = [[2]]\n", "[order, coeff]");
  expect_fail("[output]\nout_dir = \"runs\n", "unterminated quoted string");
  expect_fail("[output]\nout_dir = two words\n", "may not contain spaces");
  expect_fail("[problem]\nn =\n", "missing value");
  expect_fail("kind = nehari\n", "unknown study kind");
}

TEST_CASE("defaults dump round-trips through the parser") {
  StudyConfig defaults;
  const std::string text = dump_study_config(defaults);
  StudyConfig parsed = parse_study_config(text);
  CHECK(dump_study_config(parsed) == text);
  CHECK(parsed.kind == defaults.kind);
  CHECK(parsed.lattice_box == defaults.lattice_box);
  CHECK(parsed.verify_mc.size() == defaults.verify_mc.size());
  validate_study_config(parsed);

  StudyConfig custom = cubic_1d_config();
  custom.kind = StudyKind::c_sweep;
  custom.eps_list = {0.0, 0.03125};
  custom.verify_mc = {{1.0, 2.5}};
  custom.out_dir = "runs/x y";
  custom.seed = 18446744073709551615ull; // largest u64 survives the trip
  StudyConfig back = parse_study_config(dump_study_config(custom));
  CHECK(dump_study_config(back) == dump_study_config(custom));
  CHECK(back.seed == custom.seed);
  CHECK(back.out_dir == custom.out_dir);
}

TEST_CASE("config validation enforces invariants") {
  auto expect_bad = [](StudyConfig cfg, const std::string& needle) {
    try {
      validate_study_config(cfg);
      FAIL_CHECK("expected a config error containing: " << needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  StudyConfig ok;
  validate_study_config(ok);

  StudyConfig c = ok;
  c.dim = 4;
  expect_bad(c, "dim");
  c = ok;
  c.n = 100;
  expect_bad(c, "power of two");
  c = ok;
  c.eps_list = {0.0, 0.1, 0.05};
  expect_bad(c, "strictly monotone");
  c = ok;
  c.eps_list = {};
  expect_bad(c, "nonempty");
  c = ok;
  c.kind = StudyKind::c_sweep;
  c.c_list = {2.0, 4.0};
  expect_bad(c, "at least 3 c values");
  c = ok;
  c.kind = StudyKind::c_sweep;
  c.J_list = {2};
  expect_bad(c, "odd J");
  c = ok;
  c.grad_tol = -1.0;
  expect_bad(c, "tolerances");
  c = ok;
  c.nonlinearity = "hartree";
  c.dim = 1;
  expect_bad(c, "dim = 3");
  c = ok;
  c.dim = 3;
  c.k = 2;
  expect_bad(c, "only k = 1");
  c = ok;
  c.kind = StudyKind::eps_sweep;
  c.symbol = "laplacian";
  expect_bad(c, "eps parameter");
  c = ok;
  c.workers = 0;
  expect_bad(c, "workers");
  c = ok;
  c.verify_mc = {{1.0, -1.0}};
  expect_bad(c, "mc_list");
}

TEST_CASE("rate fit recovers exact power laws") {
  std::vector<std::array<double, 2>> pts;
  for (double cv : {2.0, 4.0, 8.0, 16.0}) pts.push_back({cv, 7.0 / (cv * cv)});
  RateFit fit = fit_rate(pts);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(fit.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-10));
  CHECK(fit.max_residual < 1e-12);
  CHECK(fit.log_points.size() == 4);

  CHECK_THROWS_AS(fit_rate({{2.0, 1.0}, {4.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{2.0, 1.0}, {4.0, 0.0}, {8.0, 0.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{2.0, 1.0}, {2.0, 0.5}, {2.0, 0.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{-2.0, 1.0}, {4.0, 0.5}, {8.0, 0.1}}),
                  std::invalid_argument);
}

TEST_CASE("field dumps round-trip") {
  GridSpec g = make_grid(2, 16, 12.5);
  Field u = random_smooth_field(g, 42, 2.5);
  std::string bytes = encode_field(u);
  CHECK(bytes.size() == 26 + 16 * g.size());
  Field v = decode_field(bytes);
  CHECK(v.grid() == g);
  CHECK(v.space() == Space::fourier);
  CHECK(v.reality() == u.reality());
  Field uf = ensure_space(u, Space::fourier);
  for (std::size_t i = 0; i < uf.size(); ++i) {
    CHECK(uf[i].real() == v[i].real());
    CHECK(uf[i].imag() == v[i].imag());
  }

  CHECK_THROWS_AS(decode_field(bytes.substr(0, 40)), io_error);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad), io_error);
  std::string short_payload = bytes.substr(0, bytes.size() - 16);
  CHECK_THROWS_AS(decode_field(short_payload), io_error);
}

TEST_CASE("centered ground state lands on the radial sector") {
  StudyConfig cfg = cubic_1d_config();
  GroundStateProblem prob(study_grid(cfg), DispersionSymbol::laplacian(),
                          study_nonlinearity(cfg));
  GroundStateResult res =
      centered_ground_state(prob, study_solver_config(cfg));
  REQUIRE(res.converged);
  CHECK(radial_defect(res.Q) < 1e-10);
  CHECK(res.action == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("groundstate study produces a converged summary") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::groundstate;
  cfg.symbol = "laplacian";
  GroundStudyResult r = run_groundstate(cfg);
  REQUIRE(r.result.converged);
  CHECK(r.result.action == doctest::Approx(4.0 / 3.0).epsilon(1e-7));
  CHECK(r.kernels.solution_like);
  REQUIRE(r.kernels.rows.size() == 2); // one plus row, one minus row
  CHECK(r.kernels.rows[0].residual < 1e-6);
  CHECK(r.kernels.rows[1].residual < 1e-7);
}

TEST_CASE("spectrum study reports both signs") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::spectrum;
  cfg.symbol = "laplacian";
  SpectrumStudyResult r = run_spectrum(cfg);
  REQUIRE(r.ground.converged);
  CHECK(r.plus.non_degenerate);
  CHECK(r.minus.non_degenerate);
  // discrete even-sector gaps of the cubic soliton
  CHECK(r.plus.beta == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.minus.beta == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(r.plus.negative_count == 1);
}

TEST_CASE("eps sweep identifies the two branches and fits the rate") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::eps_sweep;
  cfg.eps_list = {0.0, 0.02, 0.05, 0.1};
  EpsSweepResult r = run_eps_sweep(cfg);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.all_ok);
  CHECK(r.base_h1 > 0.0);
  CHECK(r.beta0_plus == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.beta0_minus == doctest::Approx(2.0 / 3.0).epsilon(1e-6));

  // the eps = 0 row reproduces the base problem
  CHECK(r.rows[0].ok);
  CHECK(r.rows[0].dist_var_base < 1e-9);
  CHECK(r.rows[0].dist_con_base < 1e-9);
  CHECK(r.rows[0].dist_var_con < 1e-9);

  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    CHECK(row.ok);
    // contraction and variational branches agree (uniqueness)
    CHECK(row.dist_var_con < 1e-6 * r.base_h1);
    CHECK(row.contraction_factor < 0.9);
    CHECK(row.delta_eps > 0.0);
    // distances grow with eps
    CHECK(row.dist_var_base > r.rows[i - 1].dist_var_base);
  }
  // beta(eps) approaches beta0 (within 20% at the smallest swept eps)
  CHECK(std::abs(r.rows[1].beta_plus - r.beta0_plus) < 0.2 * r.beta0_plus);
  CHECK(std::abs(r.rows[1].beta_minus - r.beta0_minus) <
        0.2 * r.beta0_minus);
  // leading term eps^2 |xi|^4 gives a quadratic distance law
  REQUIRE(r.rate_valid);
  CHECK(r.rate.slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("eps sweep isolates failing points") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::eps_sweep;
  cfg.eps_list = {0.02, 4.0}; // the second point is outside the regime
  EpsSweepResult r = run_eps_sweep(cfg);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].ok);
  CHECK(r.rows[0].status.substr(0, 2) == "ok");
  CHECK_FALSE(r.rows[1].ok);
  CHECK(r.rows[1].status.find("contraction") != std::string::npos);
  CHECK_FALSE(r.all_ok);
  CHECK_FALSE(r.rate_valid);
}

TEST_CASE("eps sweep with workers is schedule independent") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::eps_sweep;
  cfg.eps_list = {0.05, 0.1};
  cfg.workers = 2;
  EpsSweepResult a = run_eps_sweep(cfg);
  EpsSweepResult b = run_eps_sweep(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.all_ok);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].dist_var_base == b.rows[i].dist_var_base);
    CHECK(a.rows[i].dist_con_base == b.rows[i].dist_con_base);
    CHECK(a.rows[i].beta_plus == b.rows[i].beta_plus);
    CHECK(a.rows[i].status == b.rows[i].status);
  }
}

TEST_CASE("c sweep fits the truncation rate") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::c_sweep;
  cfg.c_list = {4.0, 8.0, 16.0};
  cfg.J_list = {1, 3};
  CSweepResult r = run_c_sweep(cfg);
  REQUIRE(r.rows.size() == 6);
  CHECK(r.all_ok);
  // errors positive and decreasing in c within each J
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t i = 1; i < 3; ++i) {
      CHECK(r.rows[3 * j + i].error > 0.0);
      CHECK(r.rows[3 * j + i].error < r.rows[3 * j + i - 1].error);
    }
  // higher truncation order dominates at every common c
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(r.rows[3 + i].error < r.rows[i].error);
  REQUIRE(r.fits.size() == 2);
  CHECK(r.fits[0].J == 1);
  REQUIRE(r.fits[0].valid);
  CHECK(r.fits[0].fit.slope == doctest::Approx(-2.0).epsilon(0.125));
  REQUIRE(r.fits[1].valid);
  CHECK(r.fits[1].fit.slope < -3.0);
}

TEST_CASE("verify study reports the known positivity violation") {
  StudyConfig cfg;
  cfg.kind = StudyKind::verify;
  cfg.n = 64;
  cfg.box = 30.0;
  cfg.verify_k = {1, 2};
  cfg.verify_mc = {{1.0, 1.0}};
  cfg.verify_J = {1, 2, 3};
  cfg.verify_c = {4.0, 8.0, 16.0};
  cfg.lattice_dim = 1;
  cfg.lattice_n = 128;
  cfg.lattice_box = 2.0 * pi; // axis frequencies are integers up to 64
  cfg.taylor_samples = 100;
  cfg.multilinear_samples = 10;
  cfg.multilinear_n = 8;
  cfg.multilinear_box = 10.0;
  VerifyReport rep = run_verify(cfg);

  REQUIRE(rep.positivity.size() == 2);
  CHECK(rep.positivity[0].report.pass); // k = 1: the bound holds exactly
  CHECK(rep.positivity[0].report.min_ratio >= 1.0 - 1e-10);
  // k = 2: the lattice minimum sits at |xi| = m c and equals 7/8
  CHECK_FALSE(rep.positivity[1].report.pass);
  CHECK(rep.positivity[1].report.min_ratio ==
        doctest::Approx(0.875).epsilon(1e-12));
  CHECK(std::abs(rep.positivity[1].report.argmin[0]) == 1.0);
  CHECK_FALSE(rep.positivity_pass);
  CHECK_FALSE(rep.all_pass);

  CHECK(rep.taylor_finite);
  CHECK(rep.taylor_stable);
  for (const auto& [J, drift] : rep.taylor_drift) CHECK(drift < 0.2);

  // laplacian + configured radial family + pseudo-relativistic + odd
  // truncations J in {1, 3}
  REQUIRE(rep.ellipticity.size() == 5);
  CHECK(rep.ellipticity_pass);
  for (const auto& e : rep.ellipticity) CHECK(e.report.pass);

  CHECK(rep.multilinear.size() == 4);
  CHECK(rep.multilinear_shift.size() == 2);
}

TEST_CASE("run_study emits a manifest and deterministic bytes") {
  StudyConfig cfg;
  cfg.kind = StudyKind::verify;
  cfg.verify_k = {1};
  cfg.verify_mc = {{1.0, 4.0}};
  cfg.verify_J = {1};
  cfg.verify_c = {4.0, 8.0, 16.0};
  cfg.lattice_dim = 1;
  cfg.lattice_n = 64;
  cfg.taylor_samples = 50;
  cfg.multilinear_samples = 5;
  cfg.multilinear_n = 8;
  cfg.n = 64;
  StudyOutput a = run_study(cfg);
  StudyOutput b = run_study(cfg);
  CHECK(a.exit_code == 0);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].first == b.files[i].first);
    CHECK(a.files[i].second == b.files[i].second);
  }
  REQUIRE(a.files.size() == 2);
  CHECK(a.files[0].first == "manifest.json");
  CHECK(a.files[1].first == "verify.json");

  auto manifest = nlohmann::json::parse(a.files[0].second);
  CHECK(manifest["library"] == "honls");
  CHECK(manifest["study"] == "verify");
  CHECK(manifest["config"]["solver"]["seed"] == 1234);
  CHECK(manifest["config"]["verify"]["lattice_n"] == 64);
  CHECK(manifest["outputs"].size() == 2);
  CHECK(manifest["summary"]["exit_code"] == 0);
  // no wall-clock state leaks into the manifest
  CHECK(a.files[0].second.find("time") == std::string::npos);

  auto verify = nlohmann::json::parse(a.files[1].second);
  CHECK(verify["positivity_pass"] == true);
  CHECK(verify["all_pass"].is_boolean());
}

TEST_CASE("run_study maps failures to exit codes and keeps partial output") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::eps_sweep;
  cfg.eps_list = {0.02, 4.0};
  StudyOutput out = run_study(cfg);
  CHECK(out.exit_code == 1);
  CHECK(out.message.find("1 of 2") != std::string::npos);
  std::set<std::string> names;
  for (const auto& [name, bytes] : out.files) names.insert(name);
  CHECK(names.count("manifest.json") == 1);
  CHECK(names.count("eps_sweep.csv") == 1);
  CHECK(names.count("rate.json") == 1);

  StudyConfig bad = cubic_1d_config();
  bad.kind = StudyKind::groundstate;
  bad.nonlinearity = "hartree"; // dim stays 1
  CHECK_THROWS_AS(run_study(bad), std::invalid_argument);

  StudyConfig stuck = cubic_1d_config();
  stuck.kind = StudyKind::groundstate;
  stuck.symbol = "laplacian";
  stuck.max_iters = 3;
  stuck.multistart = 1;
  StudyOutput failed = run_study(stuck);
  CHECK(failed.exit_code == 1);
  CHECK(failed.message.find("ground state failed") != std::string::npos);
}

TEST_CASE("run_study groundstate emits logs and fields") {
  StudyConfig cfg = cubic_1d_config();
  cfg.kind = StudyKind::groundstate;
  cfg.symbol = "laplacian";
  cfg.write_fields = true;
  StudyOutput out = run_study(cfg);
  CHECK(out.exit_code == 0);
  std::string qbytes;
  std::string itbytes;
  for (const auto& [name, bytes] : out.files) {
    if (name == "Q.fld") qbytes = bytes;
    if (name == "iterations.csv") itbytes = bytes;
  }
  REQUIRE_FALSE(qbytes.empty());
  Field q = decode_field(qbytes);
  CHECK(q.grid().n == 256);
  CHECK(max_abs(q) > 0.0);
  REQUIRE_FALSE(itbytes.empty());
  CHECK(itbytes.substr(0, 25) == "iter,action,residual,step");
}

TEST_CASE("write_study_output creates the files on disk") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "honls_study_io_test";
  fs::remove_all(dir);
  StudyOutput out;
  out.files.push_back({"a.txt", "hello\n"});
  out.files.push_back({"b.bin", std::string("\0\x01\x02", 3)});
  write_study_output(out, dir.string());
  std::ifstream a(dir / "a.txt", std::ios::binary);
  std::ostringstream abuf;
  abuf << a.rdbuf();
  CHECK(abuf.str() == "hello\n");
  std::ifstream b(dir / "b.bin", std::ios::binary);
  std::ostringstream bbuf;
  bbuf << b.rdbuf();
  CHECK(bbuf.str().size() == 3);
  fs::remove_all(dir);
}
