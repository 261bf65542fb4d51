// Serialization of study results: CSV tables, JSON reports, the run
// manifest, and the binary field dump, plus the run_study dispatcher that
// assembles them. All numeric output is fixed-format so identical inputs
// give identical bytes.

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "honls/spectral.hpp"
#include "honls/studies.hpp"

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

namespace honls {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'H', 'O', 'N', 'L', 'S', 'F', 'D', '1'};

void append_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void append_f64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint32_t read_u32(const std::string& s, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, s.data() + off, 4);
  return v;
}

double read_f64(const std::string& s, std::size_t off) {
  double v;
  std::memcpy(&v, s.data() + off, 8);
  return v;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

ordered_json config_json(const StudyConfig& c) {
  ordered_json j;
  j["kind"] = study_kind_name(c.kind);
  ordered_json problem;
  problem["dim"] = c.dim;
  problem["n"] = c.n;
  problem["box"] = c.box;
  problem["nonlinearity"] = c.nonlinearity;
  problem["k"] = c.k;
  problem["hartree_radius"] = c.hartree_radius;
  problem["symbol"] = c.symbol;
  problem["eps"] = c.eps;
  {
    ordered_json terms = ordered_json::array();
    for (const auto& t : c.radial_terms)
      terms.push_back(ordered_json::array({t.order, t.coeff}));
    problem["radial_terms"] = terms;
  }
  {
    ordered_json terms = ordered_json::array();
    for (const auto& t : c.aniso_terms)
      terms.push_back(ordered_json::array(
          {t.alpha[0], t.alpha[1], t.alpha[2], t.coeff}));
    problem["aniso_terms"] = terms;
  }
  problem["mass"] = c.mass;
  problem["light_speed"] = c.light_speed;
  problem["J"] = c.J;
  j["problem"] = problem;

  ordered_json solver;
  solver["grad_tol"] = c.grad_tol;
  solver["nehari_tol"] = c.nehari_tol;
  solver["max_iters"] = c.max_iters;
  solver["multistart"] = c.multistart;
  solver["seed"] = c.seed;
  solver["workers"] = c.workers;
  j["solver"] = solver;

  ordered_json contraction;
  contraction["fixed_point_tol"] = c.fixed_point_tol;
  contraction["inner_tol"] = c.inner_tol;
  contraction["inner_max_iters"] = c.inner_max_iters;
  contraction["max_outer"] = c.max_outer;
  contraction["beta0"] = c.beta0;
  j["contraction"] = contraction;

  ordered_json spectrum;
  spectrum["n_eigs"] = c.n_eigs;
  spectrum["eig_tol"] = c.eig_tol;
  spectrum["eig_max_iters"] = c.eig_max_iters;
  j["spectrum"] = spectrum;

  ordered_json sweep;
  sweep["eps_list"] = c.eps_list;
  sweep["c_list"] = c.c_list;
  sweep["J_list"] = c.J_list;
  sweep["refine_largest"] = c.refine_largest;
  j["sweep"] = sweep;

  ordered_json verify;
  verify["k_list"] = c.verify_k;
  {
    ordered_json mcs = ordered_json::array();
    for (const auto& mc : c.verify_mc)
      mcs.push_back(ordered_json::array({mc[0], mc[1]}));
    verify["mc_list"] = mcs;
  }
  verify["J_list"] = c.verify_J;
  verify["c_list"] = c.verify_c;
  verify["lattice_dim"] = c.lattice_dim;
  verify["lattice_n"] = c.lattice_n;
  verify["lattice_box"] = c.lattice_box;
  verify["taylor_s_max"] = c.taylor_s_max;
  verify["taylor_samples"] = c.taylor_samples;
  verify["multilinear_samples"] = c.multilinear_samples;
  verify["multilinear_decay"] = c.multilinear_decay;
  verify["multilinear_n"] = c.multilinear_n;
  verify["multilinear_box"] = c.multilinear_box;
  j["verify"] = verify;

  ordered_json output;
  output["out_dir"] = c.out_dir;
  output["write_fields"] = c.write_fields;
  output["log_iterations"] = c.log_iterations;
  j["output"] = output;
  return j;
}

std::string json_bytes(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json ground_json(const GroundStateResult& r) {
  ordered_json j;
  j["converged"] = r.converged;
  j["action"] = r.action;
  j["nehari_residual"] = r.nehari_residual;
  j["gradient_residual"] = r.gradient_residual;
  j["pde_residual_rel"] = r.pde_residual_rel;
  j["iterations"] = r.iterations;
  j["starts_used"] = r.starts_used;
  j["boundary_amplitude"] = r.boundary_amplitude;
  j["tail_fraction"] = r.tail_fraction;
  j["under_resolved"] = r.under_resolved;
  j["message"] = r.message;
  return j;
}

ordered_json kernel_json(const KernelResidualReport& k) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : k.rows) {
    ordered_json r;
    r["sign"] = row.sign == LinSign::plus ? "plus" : "minus";
    r["axis"] = row.axis;
    r["residual"] = row.residual;
    rows.push_back(r);
  }
  ordered_json j;
  j["rows"] = rows;
  j["pde_residual"] = k.pde_residual;
  j["solution_like"] = k.solution_like;
  j["message"] = k.message;
  return j;
}

ordered_json spectrum_json(const SpectrumReport& r) {
  ordered_json j;
  j["sign"] = r.sign == LinSign::plus ? "plus" : "minus";
  j["beta"] = r.beta;
  j["negative_count"] = r.negative_count;
  j["eigenvalues"] = r.eigenvalues;
  j["residual_norms"] = r.residual_norms;
  j["kernel_residuals"] = r.kernel_residuals;
  j["deflation_norms"] = r.deflation_norms;
  j["max_deflation_overlap"] = r.max_deflation_overlap;
  j["iterations"] = r.iterations;
  j["excluded_as_kernel"] = r.excluded_as_kernel;
  j["kernel_gate"] = r.kernel_gate;
  j["pde_residual"] = r.pde_residual;
  j["converged"] = r.converged;
  j["covered"] = r.covered;
  j["non_degenerate"] = r.non_degenerate;
  j["verdict"] = r.non_degenerate ? "non-degenerate" : "not certified";
  j["message"] = r.message;
  return j;
}

ordered_json rate_json(const RateFit& f, bool valid) {
  ordered_json j;
  j["valid"] = valid;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["max_residual"] = f.max_residual;
  ordered_json pts = ordered_json::array();
  for (const auto& lp : f.log_points)
    pts.push_back(ordered_json::array({lp[0], lp[1]}));
  j["log_points"] = pts;
  return j;
}

ordered_json contraction_json(const ContractionResult& r) {
  ordered_json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["delta_eps"] = r.delta_eps;
  j["beta0"] = r.beta0;
  j["correction_norm"] = r.correction_norm;
  j["pde_residual"] = r.pde_residual;
  j["pde_check"] = r.pde_check;
  j["within_delta"] = r.within_delta;
  j["factors_bounded"] = r.factors_bounded;
  j["geometric_decay"] = r.geometric_decay;
  j["message"] = r.message;
  return j;
}

std::string iterations_csv(const std::vector<IterationRow>& log) {
  std::string out = "iter,action,residual,step\n";
  for (const auto& row : log)
    out += csv_row({std::to_string(row.iter), format_g17(row.action),
                    format_g17(row.residual), format_g17(row.step)});
  return out;
}

std::string contraction_log_csv(const std::vector<ContractionLogRow>& log) {
  std::string out = "iter,residual,factor\n";
  for (const auto& row : log)
    out += csv_row({std::to_string(row.iter), format_g17(row.residual),
                    format_g17(row.factor)});
  return out;
}

std::string eps_sweep_csv(const EpsSweepResult& r) {
  std::string out =
      "eps,status,action,dist_var_base,dist_con_base,dist_var_con,"
      "contraction_factor,delta_eps,beta_plus,beta_minus,pde_var,pde_con\n";
  for (const auto& row : r.rows)
    out += csv_row({format_g17(row.eps), row.status, format_g17(row.action),
                    format_g17(row.dist_var_base),
                    format_g17(row.dist_con_base),
                    format_g17(row.dist_var_con),
                    format_g17(row.contraction_factor),
                    format_g17(row.delta_eps), format_g17(row.beta_plus),
                    format_g17(row.beta_minus), format_g17(row.pde_var),
                    format_g17(row.pde_con)});
  return out;
}

std::string c_sweep_csv(const CSweepResult& r) {
  std::string out =
      "c,J,status,error,action_full,action_trunc,pde_full,pde_trunc\n";
  for (const auto& row : r.rows)
    out += csv_row({format_g17(row.c), std::to_string(row.J), row.status,
                    format_g17(row.error), format_g17(row.action_full),
                    format_g17(row.action_trunc), format_g17(row.pde_full),
                    format_g17(row.pde_trunc)});
  return out;
}

ordered_json verify_json(const VerifyReport& rep) {
  ordered_json j;
  {
    ordered_json rows = ordered_json::array();
    for (const auto& e : rep.positivity) {
      ordered_json r;
      r["k"] = e.k;
      r["m"] = e.m;
      r["c"] = e.c;
      r["min_ratio"] = e.report.min_ratio;
      r["argmin"] = ordered_json::array(
          {e.report.argmin[0], e.report.argmin[1], e.report.argmin[2]});
      r["pass"] = e.report.pass;
      rows.push_back(r);
    }
    j["positivity"] = rows;
    j["positivity_pass"] = rep.positivity_pass;
  }
  {
    ordered_json rows = ordered_json::array();
    for (const auto& e : rep.taylor) {
      ordered_json r;
      r["m"] = e.m;
      r["c"] = e.c;
      r["J"] = e.J;
      r["sup_ratio"] = e.report.sup_ratio;
      r["argmax_s"] = e.report.argmax_s;
      r["samples"] = e.report.samples;
      rows.push_back(r);
    }
    j["taylor"] = rows;
    ordered_json drift = ordered_json::array();
    for (const auto& [J, d] : rep.taylor_drift) {
      ordered_json r;
      r["J"] = J;
      r["drift"] = d;
      drift.push_back(r);
    }
    j["taylor_drift"] = drift;
    j["taylor_finite"] = rep.taylor_finite;
    j["taylor_stable"] = rep.taylor_stable;
  }
  {
    ordered_json rows = ordered_json::array();
    for (const auto& e : rep.ellipticity) {
      ordered_json r;
      r["symbol"] = e.symbol;
      r["gamma"] = e.report.gamma;
      r["argmin"] = ordered_json::array(
          {e.report.argmin[0], e.report.argmin[1], e.report.argmin[2]});
      r["lattice_pass"] = e.report.lattice_pass;
      r["tail_negative"] = e.report.tail_negative;
      r["pass"] = e.report.pass;
      rows.push_back(r);
    }
    j["ellipticity"] = rows;
    j["ellipticity_pass"] = rep.ellipticity_pass;
  }
  {
    ordered_json rows = ordered_json::array();
    for (const auto& e : rep.multilinear) {
      ordered_json r;
      r["form"] = e.form;
      r["n"] = e.n;
      r["max_ratio"] = e.max_ratio;
      rows.push_back(r);
    }
    j["multilinear"] = rows;
    ordered_json shifts = ordered_json::array();
    for (const auto& [form, s] : rep.multilinear_shift) {
      ordered_json r;
      r["form"] = form;
      r["shift"] = s;
      shifts.push_back(r);
    }
    j["multilinear_shift"] = shifts;
    j["multilinear_stable"] = rep.multilinear_stable;
  }
  j["all_pass"] = rep.all_pass;
  return j;
}

std::string field_name(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.fld", prefix, i);
  return buf;
}

} // namespace

const char* library_version() { return "1.0.0"; }

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string encode_field(const Field& u) {
  if (u.grid().dim < 1 || u.size() == 0)
    throw std::invalid_argument("encode_field: empty field");
  Field uf = ensure_space(u, Space::fourier);
  std::string out;
  out.reserve(26 + 16 * uf.size());
  out.append(kMagic, 8);
  append_u32(out, static_cast<std::uint32_t>(uf.grid().dim));
  append_u32(out, static_cast<std::uint32_t>(uf.grid().n));
  append_f64(out, uf.grid().box);
  out.push_back(1); // Fourier space
  out.push_back(u.reality() == Reality::real_valued ? 0 : 1);
  for (std::size_t i = 0; i < uf.size(); ++i) {
    append_f64(out, uf[i].real());
    append_f64(out, uf[i].imag());
  }
  return out;
}

Field decode_field(const std::string& bytes) {
  if (bytes.size() < 26 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw io_error("field dump: bad magic or truncated header");
  const std::uint32_t dim = read_u32(bytes, 8);
  const std::uint32_t n = read_u32(bytes, 12);
  const double box = read_f64(bytes, 16);
  const char space_tag = bytes[24];
  const char reality_tag = bytes[25];
  if (space_tag != 1)
    throw io_error("field dump: unknown space tag");
  if (reality_tag != 0 && reality_tag != 1)
    throw io_error("field dump: unknown reality tag");
  GridSpec g;
  try {
    g = make_grid(static_cast<int>(dim), static_cast<int>(n), box);
  } catch (const std::exception& e) {
    throw io_error(std::string("field dump: invalid grid: ") + e.what());
  }
  if (bytes.size() != 26 + 16 * g.size())
    throw io_error("field dump: payload size does not match the grid");
  Field u(g, Space::fourier,
          reality_tag == 0 ? Reality::real_valued : Reality::complex_valued);
  std::size_t off = 26;
  for (std::size_t i = 0; i < g.size(); ++i, off += 16)
    u[i] = {read_f64(bytes, off), read_f64(bytes, off + 8)};
  return u;
}

StudyOutput run_study(const StudyConfig& cfg) {
  validate_study_config(cfg);
  StudyOutput out;
  ordered_json summary;
  try {
    switch (cfg.kind) {
      case StudyKind::groundstate: {
        GroundStudyResult r = run_groundstate(cfg);
        ordered_json j = ground_json(r.result);
        if (r.result.converged) j["kernels"] = kernel_json(r.kernels);
        out.files.push_back({"groundstate.json", json_bytes(j)});
        if (cfg.log_iterations)
          out.files.push_back({"iterations.csv",
                               iterations_csv(r.result.log)});
        if (cfg.write_fields && r.result.converged)
          out.files.push_back({"Q.fld", encode_field(r.result.Q)});
        summary["converged"] = r.result.converged;
        summary["action"] = r.result.action;
        summary["gradient_residual"] = r.result.gradient_residual;
        summary["pde_residual_rel"] = r.result.pde_residual_rel;
        out.exit_code = r.result.converged ? 0 : 1;
        out.message = r.result.converged
                          ? "ground state converged"
                          : "ground state failed: " + r.result.message;
        break;
      }
      case StudyKind::contraction: {
        ContractionStudyResult r = run_contraction(cfg);
        ordered_json j;
        j["base"] = ground_json(r.base);
        j["contraction"] = contraction_json(r.contraction);
        out.files.push_back({"contraction.json", json_bytes(j)});
        if (cfg.log_iterations)
          out.files.push_back({"contraction_log.csv",
                               contraction_log_csv(r.contraction.log)});
        if (cfg.write_fields) {
          out.files.push_back({"Q0.fld", encode_field(r.base.Q)});
          if (r.contraction.converged) {
            out.files.push_back({"u.fld", encode_field(r.contraction.u)});
            out.files.push_back(
                {"correction.fld", encode_field(r.contraction.correction)});
          }
        }
        summary["converged"] = r.contraction.converged;
        summary["delta_eps"] = r.contraction.delta_eps;
        summary["beta0"] = r.contraction.beta0;
        summary["correction_norm"] = r.contraction.correction_norm;
        summary["pde_residual"] = r.contraction.pde_residual;
        out.exit_code = r.contraction.converged ? 0 : 1;
        out.message = r.contraction.converged
                          ? "contraction converged"
                          : "contraction failed: " + r.contraction.message;
        break;
      }
      case StudyKind::spectrum: {
        SpectrumStudyResult r = run_spectrum(cfg);
        ordered_json j;
        j["ground"] = ground_json(r.ground);
        j["plus"] = spectrum_json(r.plus);
        j["minus"] = spectrum_json(r.minus);
        out.files.push_back({"spectrum.json", json_bytes(j)});
        if (cfg.write_fields)
          out.files.push_back({"Q.fld", encode_field(r.ground.Q)});
        summary["beta_plus"] = r.plus.beta;
        summary["beta_minus"] = r.minus.beta;
        summary["negative_count_plus"] = r.plus.negative_count;
        summary["non_degenerate"] =
            r.plus.non_degenerate && r.minus.non_degenerate;
        const bool solved = r.plus.converged && r.minus.converged;
        out.exit_code = solved ? 0 : 1;
        out.message = solved ? "spectrum computed"
                             : "eigensolve did not converge";
        break;
      }
      case StudyKind::eps_sweep: {
        EpsSweepResult r = run_eps_sweep(cfg);
        out.files.push_back({"eps_sweep.csv", eps_sweep_csv(r)});
        ordered_json j;
        j["fit"] = rate_json(r.rate, r.rate_valid);
        j["base_action"] = r.base.action;
        j["base_h1"] = r.base_h1;
        j["beta0_plus"] = r.beta0_plus;
        j["beta0_minus"] = r.beta0_minus;
        out.files.push_back({"rate.json", json_bytes(j)});
        if (cfg.write_fields) {
          out.files.push_back({"Q0.fld", encode_field(r.base.Q)});
          for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (r.var_fields[i].size() > 0)
              out.files.push_back(
                  {field_name("var", i), encode_field(r.var_fields[i])});
            if (r.con_fields[i].size() > 0)
              out.files.push_back(
                  {field_name("con", i), encode_field(r.con_fields[i])});
          }
        }
        std::size_t failed = 0;
        for (const auto& row : r.rows)
          if (!row.ok) ++failed;
        summary["points"] = r.rows.size();
        summary["failed"] = failed;
        summary["rate_valid"] = r.rate_valid;
        summary["slope"] = r.rate.slope;
        summary["beta0_plus"] = r.beta0_plus;
        out.exit_code = r.all_ok ? 0 : 1;
        out.message = r.all_ok ? "eps sweep complete"
                               : "eps sweep: " + std::to_string(failed) +
                                     " of " + std::to_string(r.rows.size()) +
                                     " points failed";
        break;
      }
      case StudyKind::c_sweep: {
        CSweepResult r = run_c_sweep(cfg);
        out.files.push_back({"c_sweep.csv", c_sweep_csv(r)});
        ordered_json j;
        ordered_json fits = ordered_json::array();
        for (const auto& jf : r.fits) {
          ordered_json f = rate_json(jf.fit, jf.valid);
          f["J"] = jf.J;
          if (!jf.note.empty()) f["note"] = jf.note;
          fits.push_back(f);
        }
        j["fits"] = fits;
        ordered_json refs = ordered_json::array();
        for (const auto& ref : r.refinements) {
          ordered_json f;
          f["J"] = ref.J;
          f["c"] = ref.c;
          f["error_coarse"] = ref.error_coarse;
          f["error_fine"] = ref.error_fine;
          f["shift"] = ref.shift;
          refs.push_back(f);
        }
        j["refinements"] = refs;
        out.files.push_back({"rate.json", json_bytes(j)});
        if (cfg.write_fields)
          for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (r.full_fields[i].size() > 0)
              out.files.push_back(
                  {field_name("full", i), encode_field(r.full_fields[i])});
            if (r.trunc_fields[i].size() > 0)
              out.files.push_back(
                  {field_name("trunc", i), encode_field(r.trunc_fields[i])});
          }
        std::size_t failed = 0;
        for (const auto& row : r.rows)
          if (!row.ok) ++failed;
        summary["points"] = r.rows.size();
        summary["failed"] = failed;
        ordered_json slopes = ordered_json::array();
        for (const auto& jf : r.fits) {
          ordered_json s;
          s["J"] = jf.J;
          s["valid"] = jf.valid;
          s["slope"] = jf.fit.slope;
          slopes.push_back(s);
        }
        summary["slopes"] = slopes;
        out.exit_code = r.all_ok ? 0 : 1;
        out.message = r.all_ok ? "c sweep complete"
                               : "c sweep: " + std::to_string(failed) +
                                     " of " + std::to_string(r.rows.size()) +
                                     " points failed";
        break;
      }
      case StudyKind::verify: {
        VerifyReport rep = run_verify(cfg);
        out.files.push_back({"verify.json", json_bytes(verify_json(rep))});
        summary["positivity_pass"] = rep.positivity_pass;
        summary["taylor_stable"] = rep.taylor_stable;
        summary["ellipticity_pass"] = rep.ellipticity_pass;
        summary["multilinear_stable"] = rep.multilinear_stable;
        summary["all_pass"] = rep.all_pass;
        out.exit_code = 0; // findings are report entries, not failures
        out.message = rep.all_pass ? "all checks passed"
                                   : "verification found failing checks";
        break;
      }
    }
  } catch (const solver_failure& e) {
    out.files.clear();
    out.exit_code = 1;
    out.message = e.what();
    summary = ordered_json();
    summary["error"] = e.what();
  }
  summary["exit_code"] = out.exit_code;
  summary["message"] = out.message;
  ordered_json manifest;
  manifest["library"] = "honls";
  manifest["version"] = library_version();
  manifest["study"] = study_kind_name(cfg.kind);
  manifest["config"] = config_json(cfg);
  ordered_json names = ordered_json::array();
  names.push_back("manifest.json");
  for (const auto& [name, bytes] : out.files) names.push_back(name);
  manifest["outputs"] = names;
  manifest["summary"] = summary;
  out.files.insert(out.files.begin(),
                   {"manifest.json", json_bytes(manifest)});
  return out;
}

void write_study_output(const StudyOutput& out, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw io_error("cannot create output directory '" + dir +
                   "': " + ec.message());
  for (const auto& [name, bytes] : out.files) {
    fs::path p = fs::path(dir) / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open '" + p.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error("write failed for '" + p.string() + "'");
  }
}

} // namespace honls
