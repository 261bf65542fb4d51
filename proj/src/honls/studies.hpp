#pragma once

// Study orchestration. One structured configuration drives the single-run
// studies (groundstate, contraction, spectrum), the eps/c parameter sweeps
// with log-log rate fitting, and the symbol verification suite. Runners
// return plain structs; run_study turns them into named file payloads (CSV
// tables, JSON reports, a manifest with the full resolved config, optional
// binary field dumps) so identical config + seed gives identical bytes.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "honls/contraction.hpp"
#include "honls/linearization.hpp"

namespace honls {

enum class StudyKind {
  groundstate,
  contraction,
  spectrum,
  eps_sweep,
  c_sweep,
  verify,
};

const char* study_kind_name(StudyKind kind);
StudyKind parse_study_kind(const std::string& name);

struct StudyConfig {
  StudyKind kind = StudyKind::groundstate;

  // [problem]
  int dim = 1;
  int n = 256;
  double box = 30.0;
  std::string nonlinearity = "power"; // power | hartree
  int k = 1;                          // power exponent: |u|^{2k} u
  double hartree_radius = 0.0;        // <= 0 selects the default L/2
  // laplacian | radial | aniso | truncation | pseudo_relativistic
  std::string symbol = "radial";
  double eps = 0.0;
  std::vector<RadialTerm> radial_terms{{2, 1.0}};
  std::vector<AnisoTerm> aniso_terms;
  double mass = 1.0;
  double light_speed = 10.0;
  int J = 1;

  // [solver]
  double grad_tol = 1e-10;
  double nehari_tol = 1e-12;
  int max_iters = 5000;
  int multistart = 3;
  std::uint64_t seed = 1234;
  int workers = 1; // sweep-point concurrency; > 1 switches warm starts to the
                   // base solution so results are schedule-independent

  // [contraction]
  double fixed_point_tol = 1e-11;
  double inner_tol = 1e-12;
  int inner_max_iters = 2000;
  int max_outer = 200;
  double beta0 = 0.0; // <= 0 measures it at the base problem

  // [spectrum]
  int n_eigs = 6;
  double eig_tol = 1e-9;
  int eig_max_iters = 600;

  // [sweep]
  std::vector<double> eps_list{0.0, 0.01, 0.02, 0.05, 0.1};
  std::vector<double> c_list{2.0, 4.0, 8.0, 16.0};
  std::vector<int> J_list{1};
  bool refine_largest = false; // re-run the largest c at 2n to bound the
                               // discretization bias of the fitted rate

  // [verify]
  std::vector<int> verify_k{1, 2, 3, 4};
  std::vector<std::array<double, 2>> verify_mc{{{1.0, 1.0}},
                                               {{1.0, 4.0}},
                                               {{2.0, 8.0}}};
  std::vector<int> verify_J{1, 2, 3};
  std::vector<double> verify_c{4.0, 8.0, 16.0};
  int lattice_dim = 3; // symbol-scan lattice for positivity/ellipticity
  int lattice_n = 128;
  double lattice_box = 2.0 * pi; // axis frequencies are then integers
  double taylor_s_max = 1.0;
  int taylor_samples = 200;
  int multilinear_samples = 100;
  double multilinear_decay = 3.0;
  int multilinear_n = 16; // 3d Hartree trilinear grid; the power form uses
                          // the [problem] grid; both are doubled once
  double multilinear_box = 12.0;

  // [output]
  std::string out_dir = "out";
  bool write_fields = false;
  bool log_iterations = true;
};

// Config text is "key = value" lines grouped under [section] headers, with #
// comments, bools, numbers, optionally quoted strings, and single-line
// (possibly nested) arrays. Unknown sections/keys, duplicate keys, and
// malformed values are rejected with their line number. The HONLS_WORKERS
// environment variable, when set, overrides [solver] workers at parse time.
StudyConfig parse_study_config(const std::string& text);
StudyConfig parse_study_config_file(const std::string& path);

// Full resolved configuration as config-file text; parses back to an
// identical config (the `defaults` dump).
std::string dump_study_config(const StudyConfig& cfg);

// One targeted override, config-file syntax for both parts: key is dotted
// ("problem.n", "solver.seed", top-level "kind"), value as it would appear
// after the '='. Unknown keys and malformed values throw.
void set_study_key(StudyConfig& cfg, const std::string& key,
                   const std::string& value);

// Cross-field invariants: lists nonempty and strictly monotone, tolerances
// positive, enum strings known, kind-specific requirements. Throws
// std::invalid_argument.
void validate_study_config(const StudyConfig& cfg);

// Pieces resolved from the config.
GridSpec study_grid(const StudyConfig& cfg);
NonlinearityKind study_nonlinearity(const StudyConfig& cfg);
DispersionSymbol study_symbol(const StudyConfig& cfg);
DispersionSymbol study_symbol_at(const StudyConfig& cfg, double eps);
SolverConfig study_solver_config(const StudyConfig& cfg);
ContractionConfig study_contraction_config(const StudyConfig& cfg);

struct RateFit {
  std::vector<std::array<double, 2>> log_points; // (log parameter, log error)
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0; // max |log e - (slope log x + intercept)|
};

// Least-squares line through (log x, log e); needs >= 3 points with positive
// coordinates and non-degenerate abscissae.
RateFit fit_rate(const std::vector<std::array<double, 2>>& points);

struct GroundStudyResult {
  GroundStateResult result;
  KernelResidualReport kernels; // populated when the solve converged
};
GroundStudyResult run_groundstate(const StudyConfig& cfg);

struct ContractionStudyResult {
  GroundStateResult base; // centered ground state of the base problem
  ContractionResult contraction;
};
ContractionStudyResult run_contraction(const StudyConfig& cfg);

struct SpectrumStudyResult {
  GroundStateResult ground;
  SpectrumReport plus;
  SpectrumReport minus;
};
SpectrumStudyResult run_spectrum(const StudyConfig& cfg);

struct EpsSweepRow {
  double eps = 0.0;
  bool ok = false;    // false iff a solver step failed at this point
  std::string status; // "ok", "ok (<notes>)", or the failure reasons
  double action = 0.0;
  double dist_var_base = 0.0; // aligned H1 distances
  double dist_con_base = 0.0;
  double dist_var_con = 0.0;
  double contraction_factor = 0.0; // max update factor over the iteration
  double delta_eps = 0.0;
  double beta_plus = 0.0;
  double beta_minus = 0.0;
  double pde_var = 0.0;
  double pde_con = 0.0;
};

struct EpsSweepResult {
  GroundStateResult base; // centered base ground state (eps = 0)
  double base_h1 = 0.0;
  double beta0_plus = 0.0;
  double beta0_minus = 0.0;
  std::vector<EpsSweepRow> rows; // in eps_list order
  std::vector<Field> var_fields; // empty entries for failed points
  std::vector<Field> con_fields;
  RateFit rate; // dist_var_base vs eps over the ok rows with eps > 0
  bool rate_valid = false;
  bool all_ok = false;
};
EpsSweepResult run_eps_sweep(const StudyConfig& cfg);

struct CSweepRow {
  double c = 0.0;
  int J = 0;
  bool ok = false;
  std::string status;
  double error = 0.0; // aligned H1 distance between truncated and full states
  double action_full = 0.0;
  double action_trunc = 0.0;
  double pde_full = 0.0;
  double pde_trunc = 0.0;
};

struct CSweepJFit {
  int J = 0;
  RateFit fit;
  bool valid = false;
  std::string note;
};

struct CSweepRefinement {
  int J = 0;
  double c = 0.0;
  double error_coarse = 0.0;
  double error_fine = 0.0; // same point at doubled n
  double shift = 0.0;      // |fine - coarse| / coarse
};

struct CSweepResult {
  std::vector<CSweepRow> rows; // J-major, then c in c_list order
  std::vector<CSweepJFit> fits;
  std::vector<CSweepRefinement> refinements; // when refine_largest is set
  std::vector<Field> full_fields;
  std::vector<Field> trunc_fields;
  bool all_ok = false;
};
CSweepResult run_c_sweep(const StudyConfig& cfg);

struct PositivityEntry {
  int k = 0;
  double m = 0.0, c = 0.0;
  PositivityReport report;
};
struct TaylorEntry {
  double m = 0.0, c = 0.0;
  int J = 0;
  TaylorRemainderReport report;
};
struct EllipticityEntry {
  std::string symbol;
  EllipticityReport report;
};
struct MultilinearEntry {
  std::string form; // "power" or "hartree"
  int n = 0;
  double max_ratio = 0.0;
};

struct VerifyReport {
  std::vector<PositivityEntry> positivity;
  std::vector<TaylorEntry> taylor;
  std::vector<EllipticityEntry> ellipticity;
  std::vector<MultilinearEntry> multilinear;
  bool positivity_pass = false;
  bool taylor_finite = false;
  std::vector<std::pair<int, double>> taylor_drift; // per J, spread across c
  bool taylor_stable = false;                       // drift < 20%
  bool ellipticity_pass = false;
  std::vector<std::pair<std::string, double>> multilinear_shift; // per form
  bool multilinear_stable = false; // shift < 10% under grid doubling
  bool all_pass = false;
};
VerifyReport run_verify(const StudyConfig& cfg);

// A converged ground state re-centered on the radial sector: aligned to its
// own symmetrization, symmetrized, and re-converged. The contraction branch
// requires this of its base point.
GroundStateResult centered_ground_state(const GroundStateProblem& problem,
                                        const SolverConfig& cfg);

struct StudyOutput {
  int exit_code = 0;   // 0 success, 1 solver failure (per-point or fatal)
  std::string message; // one-line outcome
  std::vector<std::pair<std::string, std::string>> files; // name -> bytes
};

// Dispatches on cfg.kind, serializes the results, and always includes
// manifest.json. Solver failures are captured in exit_code/message; config
// errors throw std::invalid_argument.
StudyOutput run_study(const StudyConfig& cfg);

// Creates dir if needed and writes every payload; throws io_error on failure.
void write_study_output(const StudyOutput& out, const std::string& dir);

// Binary field dump: "HONLSFD1", u32 dim, u32 n, f64 box, u8 space tag
// (1 = Fourier), u8 reality tag, then n^d little-endian (re, im) f64 pairs of
// the Fourier coefficients in flat storage order.
std::string encode_field(const Field& u);
Field decode_field(const std::string& bytes);

// Fixed CSV number format (%.17g).
std::string format_g17(double v);

// Library version string recorded in every manifest.
const char* library_version();

} // namespace honls
