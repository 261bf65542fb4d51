#include "honls/studies.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "honls/spectral.hpp"

namespace honls {

namespace {

[[noreturn]] void fail_line(int line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                              msg);
}

[[noreturn]] void fail_cfg(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// '#' starts a comment unless inside a quoted string
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

double to_double(const std::string& s, int line) {
  const char* b = s.c_str();
  char* e = nullptr;
  errno = 0;
  double v = std::strtod(b, &e);
  if (e == b || *e != '\0' || errno == ERANGE || !std::isfinite(v))
    fail_line(line, "expected a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& s, int line) {
  const char* b = s.c_str();
  char* e = nullptr;
  errno = 0;
  long long v = std::strtoll(b, &e, 10);
  if (e == b || *e != '\0' || errno == ERANGE)
    fail_line(line, "expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s, int line) {
  const char* b = s.c_str();
  char* e = nullptr;
  errno = 0;
  if (!s.empty() && s[0] == '-')
    fail_line(line, "expected a non-negative integer, got '" + s + "'");
  unsigned long long v = std::strtoull(b, &e, 10);
  if (e == b || *e != '\0' || errno == ERANGE)
    fail_line(line, "expected a non-negative integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, int line) {
  if (s == "true") return true;
  if (s == "false") return false;
  fail_line(line, "expected true or false, got '" + s + "'");
}

std::string to_text(const std::string& s, int line) {
  if (!s.empty() && s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail_line(line, "unterminated quoted string");
    std::string inner = s.substr(1, s.size() - 2);
    if (inner.find('"') != std::string::npos)
      fail_line(line, "embedded quotes are not supported");
    return inner;
  }
  if (s.find_first_of(" \t") != std::string::npos)
    fail_line(line, "unquoted strings may not contain spaces");
  return s;
}

// top-level comma-separated items of a [...] literal
std::vector<std::string> array_items(const std::string& s, int line) {
  std::string v = trim(s);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    fail_line(line, "expected an array [...], got '" + s + "'");
  std::vector<std::string> items;
  int depth = 0;
  std::string cur;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    char ch = v[i];
    if (ch == '[') ++depth;
    if (ch == ']') {
      --depth;
      if (depth < 0) fail_line(line, "unbalanced brackets in array");
    }
    if (ch == ',' && depth == 0) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) fail_line(line, "unbalanced brackets in array");
  std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  for (const auto& it : items)
    if (it.empty()) fail_line(line, "empty array element");
  return items;
}

std::vector<double> to_double_list(const std::string& s, int line) {
  std::vector<double> out;
  for (const auto& it : array_items(s, line)) out.push_back(to_double(it, line));
  return out;
}

std::vector<int> to_int_list(const std::string& s, int line) {
  std::vector<int> out;
  for (const auto& it : array_items(s, line))
    out.push_back(static_cast<int>(to_int(it, line)));
  return out;
}

std::vector<std::array<double, 2>> to_pair_list(const std::string& s,
                                                int line) {
  std::vector<std::array<double, 2>> out;
  for (const auto& it : array_items(s, line)) {
    auto pair = array_items(it, line);
    if (pair.size() != 2)
      fail_line(line, "expected [a, b] pairs, got '" + it + "'");
    out.push_back({to_double(pair[0], line), to_double(pair[1], line)});
  }
  return out;
}

std::vector<RadialTerm> to_radial_terms(const std::string& s, int line) {
  std::vector<RadialTerm> out;
  for (const auto& it : array_items(s, line)) {
    auto pair = array_items(it, line);
    if (pair.size() != 2)
      fail_line(line, "expected [order, coeff] pairs, got '" + it + "'");
    out.push_back(
        {static_cast<int>(to_int(pair[0], line)), to_double(pair[1], line)});
  }
  return out;
}

std::vector<AnisoTerm> to_aniso_terms(const std::string& s, int line) {
  std::vector<AnisoTerm> out;
  for (const auto& it : array_items(s, line)) {
    auto quad = array_items(it, line);
    if (quad.size() != 4)
      fail_line(line, "expected [a1, a2, a3, coeff] entries, got '" + it + "'");
    AnisoTerm t;
    for (int a = 0; a < 3; ++a)
      t.alpha[a] = static_cast<int>(to_int(quad[a], line));
    t.coeff = to_double(quad[3], line);
    out.push_back(t);
  }
  return out;
}

void apply_key(StudyConfig& c, const std::string& section,
               const std::string& key, const std::string& value, int line) {
  const std::string full = section.empty() ? key : section + "." + key;
  auto as_int = [&] { return static_cast<int>(to_int(value, line)); };

  if (full == "kind") {
    c.kind = parse_study_kind(to_text(value, line));
  } else if (full == "problem.dim") {
    c.dim = as_int();
  } else if (full == "problem.n") {
    c.n = as_int();
  } else if (full == "problem.box") {
    c.box = to_double(value, line);
  } else if (full == "problem.nonlinearity") {
    c.nonlinearity = to_text(value, line);
  } else if (full == "problem.k") {
    c.k = as_int();
  } else if (full == "problem.hartree_radius") {
    c.hartree_radius = to_double(value, line);
  } else if (full == "problem.symbol") {
    c.symbol = to_text(value, line);
  } else if (full == "problem.eps") {
    c.eps = to_double(value, line);
  } else if (full == "problem.radial_terms") {
    c.radial_terms = to_radial_terms(value, line);
  } else if (full == "problem.aniso_terms") {
    c.aniso_terms = to_aniso_terms(value, line);
  } else if (full == "problem.mass") {
    c.mass = to_double(value, line);
  } else if (full == "problem.light_speed") {
    c.light_speed = to_double(value, line);
  } else if (full == "problem.J") {
    c.J = as_int();
  } else if (full == "solver.grad_tol") {
    c.grad_tol = to_double(value, line);
  } else if (full == "solver.nehari_tol") {
    c.nehari_tol = to_double(value, line);
  } else if (full == "solver.max_iters") {
    c.max_iters = as_int();
  } else if (full == "solver.multistart") {
    c.multistart = as_int();
  } else if (full == "solver.seed") {
    c.seed = to_u64(value, line);
  } else if (full == "solver.workers") {
    c.workers = as_int();
  } else if (full == "contraction.fixed_point_tol") {
    c.fixed_point_tol = to_double(value, line);
  } else if (full == "contraction.inner_tol") {
    c.inner_tol = to_double(value, line);
  } else if (full == "contraction.inner_max_iters") {
    c.inner_max_iters = as_int();
  } else if (full == "contraction.max_outer") {
    c.max_outer = as_int();
  } else if (full == "contraction.beta0") {
    c.beta0 = to_double(value, line);
  } else if (full == "spectrum.n_eigs") {
    c.n_eigs = as_int();
  } else if (full == "spectrum.eig_tol") {
    c.eig_tol = to_double(value, line);
  } else if (full == "spectrum.eig_max_iters") {
    c.eig_max_iters = as_int();
  } else if (full == "sweep.eps_list") {
    c.eps_list = to_double_list(value, line);
  } else if (full == "sweep.c_list") {
    c.c_list = to_double_list(value, line);
  } else if (full == "sweep.J_list") {
    c.J_list = to_int_list(value, line);
  } else if (full == "sweep.refine_largest") {
    c.refine_largest = to_bool(value, line);
  } else if (full == "verify.k_list") {
    c.verify_k = to_int_list(value, line);
  } else if (full == "verify.mc_list") {
    c.verify_mc = to_pair_list(value, line);
  } else if (full == "verify.J_list") {
    c.verify_J = to_int_list(value, line);
  } else if (full == "verify.c_list") {
    c.verify_c = to_double_list(value, line);
  } else if (full == "verify.lattice_dim") {
    c.lattice_dim = as_int();
  } else if (full == "verify.lattice_n") {
    c.lattice_n = as_int();
  } else if (full == "verify.lattice_box") {
    c.lattice_box = to_double(value, line);
  } else if (full == "verify.taylor_s_max") {
    c.taylor_s_max = to_double(value, line);
  } else if (full == "verify.taylor_samples") {
    c.taylor_samples = as_int();
  } else if (full == "verify.multilinear_samples") {
    c.multilinear_samples = as_int();
  } else if (full == "verify.multilinear_decay") {
    c.multilinear_decay = to_double(value, line);
  } else if (full == "verify.multilinear_n") {
    c.multilinear_n = as_int();
  } else if (full == "verify.multilinear_box") {
    c.multilinear_box = to_double(value, line);
  } else if (full == "output.out_dir") {
    c.out_dir = to_text(value, line);
  } else if (full == "output.write_fields") {
    c.write_fields = to_bool(value, line);
  } else if (full == "output.log_iterations") {
    c.log_iterations = to_bool(value, line);
  } else {
    std::string where =
        section.empty() ? "at top level" : "in section [" + section + "]";
    fail_line(line, "unknown key '" + key + "' " + where);
  }
}

std::string quote_text(const std::string& s) {
  if (s.empty() || s.find_first_of(" \t#\"[]=") != std::string::npos)
    return "\"" + s + "\"";
  return s;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// keep sweep status cells CSV-safe
std::string sanitize_status(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

bool power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

void check_monotone(const std::vector<double>& v, const std::string& name) {
  if (v.empty()) fail_cfg(name + " must be nonempty");
  if (v.size() < 2) return;
  bool inc = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    double d = v[i] - v[i - 1];
    if (d == 0.0 || (d > 0) != inc)
      fail_cfg(name + " must be strictly monotone");
  }
}

void check_monotone(const std::vector<int>& v, const std::string& name) {
  std::vector<double> d(v.begin(), v.end());
  check_monotone(d, name);
}

double max_update_factor(const ContractionResult& r) {
  double f = 0.0;
  for (const auto& row : r.log) f = std::max(f, row.factor);
  return f;
}

} // namespace

const char* study_kind_name(StudyKind kind) {
  switch (kind) {
    case StudyKind::groundstate: return "groundstate";
    case StudyKind::contraction: return "contraction";
    case StudyKind::spectrum: return "spectrum";
    case StudyKind::eps_sweep: return "eps_sweep";
    case StudyKind::c_sweep: return "c_sweep";
    case StudyKind::verify: return "verify";
  }
  return "groundstate";
}

StudyKind parse_study_kind(const std::string& name) {
  for (StudyKind k :
       {StudyKind::groundstate, StudyKind::contraction, StudyKind::spectrum,
        StudyKind::eps_sweep, StudyKind::c_sweep, StudyKind::verify})
    if (name == study_kind_name(k)) return k;
  throw std::invalid_argument(
      "config: unknown study kind '" + name +
      "' (expected groundstate, contraction, spectrum, eps_sweep, c_sweep, "
      "or verify)");
}

StudyConfig parse_study_config(const std::string& text) {
  StudyConfig cfg;
  std::set<std::string> seen;
  std::string section;
  static const std::set<std::string> sections = {
      "problem", "solver", "contraction", "spectrum",
      "sweep",   "verify", "output"};
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' &&
        line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section))
        fail_line(line_no, "unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail_line(line_no, "expected key = value or [section]");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_line(line_no, "missing key before '='");
    if (value.empty()) fail_line(line_no, "missing value for '" + key + "'");
    std::string full = section.empty() ? key : section + "." + key;
    if (!seen.insert(full).second)
      fail_line(line_no, "duplicate key '" + full + "'");
    apply_key(cfg, section, key, value, line_no);
  }
  if (const char* env = std::getenv("HONLS_WORKERS")) {
    char* e = nullptr;
    errno = 0;
    long v = std::strtol(env, &e, 10);
    if (e == env || *e != '\0' || errno == ERANGE || v < 1)
      throw std::invalid_argument(
          "config: HONLS_WORKERS must be a positive integer");
    cfg.workers = static_cast<int>(v);
  }
  return cfg;
}

void set_study_key(StudyConfig& cfg, const std::string& key,
                   const std::string& value) {
  std::string section, name = key;
  const std::size_t dot = key.find('.');
  if (dot != std::string::npos) {
    section = key.substr(0, dot);
    name = key.substr(dot + 1);
  }
  try {
    apply_key(cfg, section, name, trim(value), 0);
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    const std::string pfx = "config line 0: ";
    if (msg.rfind(pfx, 0) == 0)
      msg = "config override '" + key + "': " + msg.substr(pfx.size());
    throw std::invalid_argument(msg);
  }
}

StudyConfig parse_study_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::invalid_argument("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_study_config(buf.str());
}

std::string dump_study_config(const StudyConfig& c) {
  std::ostringstream o;
  auto g = [](double v) { return format_g17(v); };
  auto dlist = [&](const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(g(x));
    return "[" + join(parts, ", ") + "]";
  };
  auto ilist = [&](const std::vector<int>& v) {
    std::vector<std::string> parts;
    for (int x : v) parts.push_back(std::to_string(x));
    return "[" + join(parts, ", ") + "]";
  };
  o << "kind = " << study_kind_name(c.kind) << "\n";
  o << "\n[problem]\n";
  o << "dim = " << c.dim << "\n";
  o << "n = " << c.n << "\n";
  o << "box = " << g(c.box) << "\n";
  o << "nonlinearity = " << quote_text(c.nonlinearity) << "\n";
  o << "k = " << c.k << "\n";
  o << "hartree_radius = " << g(c.hartree_radius) << "\n";
  o << "symbol = " << quote_text(c.symbol) << "\n";
  o << "eps = " << g(c.eps) << "\n";
  {
    std::vector<std::string> parts;
    for (const auto& t : c.radial_terms)
      parts.push_back("[" + std::to_string(t.order) + ", " + g(t.coeff) + "]");
    o << "radial_terms = [" << join(parts, ", ") << "]\n";
  }
  {
    std::vector<std::string> parts;
    for (const auto& t : c.aniso_terms)
      parts.push_back("[" + std::to_string(t.alpha[0]) + ", " +
                      std::to_string(t.alpha[1]) + ", " +
                      std::to_string(t.alpha[2]) + ", " + g(t.coeff) + "]");
    o << "aniso_terms = [" << join(parts, ", ") << "]\n";
  }
  o << "mass = " << g(c.mass) << "\n";
  o << "light_speed = " << g(c.light_speed) << "\n";
  o << "J = " << c.J << "\n";
  o << "\n[solver]\n";
  o << "grad_tol = " << g(c.grad_tol) << "\n";
  o << "nehari_tol = " << g(c.nehari_tol) << "\n";
  o << "max_iters = " << c.max_iters << "\n";
  o << "multistart = " << c.multistart << "\n";
  o << "seed = " << c.seed << "\n";
  o << "workers = " << c.workers << "\n";
  o << "\n[contraction]\n";
  o << "fixed_point_tol = " << g(c.fixed_point_tol) << "\n";
  o << "inner_tol = " << g(c.inner_tol) << "\n";
  o << "inner_max_iters = " << c.inner_max_iters << "\n";
  o << "max_outer = " << c.max_outer << "\n";
  o << "beta0 = " << g(c.beta0) << "\n";
  o << "\n[spectrum]\n";
  o << "n_eigs = " << c.n_eigs << "\n";
  o << "eig_tol = " << g(c.eig_tol) << "\n";
  o << "eig_max_iters = " << c.eig_max_iters << "\n";
  o << "\n[sweep]\n";
  o << "eps_list = " << dlist(c.eps_list) << "\n";
  o << "c_list = " << dlist(c.c_list) << "\n";
  o << "J_list = " << ilist(c.J_list) << "\n";
  o << "refine_largest = " << (c.refine_largest ? "true" : "false") << "\n";
  o << "\n[verify]\n";
  o << "k_list = " << ilist(c.verify_k) << "\n";
  {
    std::vector<std::string> parts;
    for (const auto& mc : c.verify_mc)
      parts.push_back("[" + g(mc[0]) + ", " + g(mc[1]) + "]");
    o << "mc_list = [" << join(parts, ", ") << "]\n";
  }
  o << "J_list = " << ilist(c.verify_J) << "\n";
  o << "c_list = " << dlist(c.verify_c) << "\n";
  o << "lattice_dim = " << c.lattice_dim << "\n";
  o << "lattice_n = " << c.lattice_n << "\n";
  o << "lattice_box = " << g(c.lattice_box) << "\n";
  o << "taylor_s_max = " << g(c.taylor_s_max) << "\n";
  o << "taylor_samples = " << c.taylor_samples << "\n";
  o << "multilinear_samples = " << c.multilinear_samples << "\n";
  o << "multilinear_decay = " << g(c.multilinear_decay) << "\n";
  o << "multilinear_n = " << c.multilinear_n << "\n";
  o << "multilinear_box = " << g(c.multilinear_box) << "\n";
  o << "\n[output]\n";
  o << "out_dir = " << quote_text(c.out_dir) << "\n";
  o << "write_fields = " << (c.write_fields ? "true" : "false") << "\n";
  o << "log_iterations = " << (c.log_iterations ? "true" : "false") << "\n";
  return o.str();
}

void validate_study_config(const StudyConfig& c) {
  if (c.dim < 1 || c.dim > 3) fail_cfg("dim must be 1, 2, or 3");
  if (c.n < 8 || !power_of_two(c.n)) fail_cfg("n must be a power of two >= 8");
  if (!(c.box > 0.0)) fail_cfg("box must be positive");
  if (c.nonlinearity != "power" && c.nonlinearity != "hartree")
    fail_cfg("nonlinearity must be power or hartree");
  if (c.nonlinearity == "power") {
    if (c.k < 1) fail_cfg("k must be >= 1");
    if (c.dim == 3 && c.k != 1)
      fail_cfg("the power nonlinearity in dim 3 admits only k = 1");
  } else if (c.dim != 3) {
    fail_cfg("the Hartree nonlinearity requires dim = 3");
  }
  if (c.symbol != "laplacian" && c.symbol != "radial" && c.symbol != "aniso" &&
      c.symbol != "truncation" && c.symbol != "pseudo_relativistic")
    fail_cfg("unknown symbol family '" + c.symbol + "'");
  if (c.eps < 0.0) fail_cfg("eps must be >= 0");
  for (const auto& t : c.radial_terms)
    if (t.order < 2) fail_cfg("radial term orders must be >= 2");
  if (!(c.mass > 0.0) || !(c.light_speed > 0.0))
    fail_cfg("mass and light_speed must be positive");
  if (c.J < 1) fail_cfg("J must be >= 1");

  if (!(c.grad_tol > 0.0) || !(c.nehari_tol > 0.0) ||
      !(c.fixed_point_tol > 0.0) || !(c.inner_tol > 0.0) ||
      !(c.eig_tol > 0.0))
    fail_cfg("tolerances must be positive");
  if (c.max_iters < 1 || c.multistart < 1 || c.inner_max_iters < 1 ||
      c.max_outer < 1 || c.eig_max_iters < 1)
    fail_cfg("iteration limits must be at least 1");
  if (c.workers < 1 || c.workers > 256)
    fail_cfg("workers must be between 1 and 256");
  if (c.n_eigs < 1) fail_cfg("n_eigs must be at least 1");

  check_monotone(c.eps_list, "eps_list");
  for (double e : c.eps_list)
    if (e < 0.0) fail_cfg("eps_list entries must be >= 0");
  check_monotone(c.c_list, "c_list");
  for (double v : c.c_list)
    if (!(v > 0.0)) fail_cfg("c_list entries must be positive");
  check_monotone(c.J_list, "J_list");
  for (int j : c.J_list)
    if (j < 1) fail_cfg("J_list entries must be >= 1");

  check_monotone(c.verify_k, "verify k_list");
  for (int k : c.verify_k)
    if (k < 1) fail_cfg("verify k_list entries must be >= 1");
  if (c.verify_mc.empty()) fail_cfg("verify mc_list must be nonempty");
  for (const auto& mc : c.verify_mc)
    if (!(mc[0] > 0.0) || !(mc[1] > 0.0))
      fail_cfg("verify mc_list entries must be positive");
  check_monotone(c.verify_J, "verify J_list");
  for (int j : c.verify_J)
    if (j < 1) fail_cfg("verify J_list entries must be >= 1");
  check_monotone(c.verify_c, "verify c_list");
  for (double v : c.verify_c)
    if (!(v > 0.0)) fail_cfg("verify c_list entries must be positive");
  if (c.lattice_dim < 1 || c.lattice_dim > 3)
    fail_cfg("lattice_dim must be 1, 2, or 3");
  if (c.lattice_n < 8 || !power_of_two(c.lattice_n))
    fail_cfg("lattice_n must be a power of two >= 8");
  if (!(c.lattice_box > 0.0)) fail_cfg("lattice_box must be positive");
  if (!(c.taylor_s_max > 0.0)) fail_cfg("taylor_s_max must be positive");
  if (c.taylor_samples < 2) fail_cfg("taylor_samples must be at least 2");
  if (c.multilinear_samples < 1)
    fail_cfg("multilinear_samples must be at least 1");
  if (!(c.multilinear_decay > 0.5))
    fail_cfg("multilinear_decay must exceed 1/2 for H1 fields");
  if (c.multilinear_n < 8 || !power_of_two(c.multilinear_n))
    fail_cfg("multilinear_n must be a power of two >= 8");
  if (!(c.multilinear_box > 0.0)) fail_cfg("multilinear_box must be positive");
  if (c.out_dir.empty()) fail_cfg("out_dir must be nonempty");

  const bool eps_family = c.symbol == "radial" || c.symbol == "aniso";
  if (c.kind == StudyKind::eps_sweep && !eps_family)
    fail_cfg("the eps sweep needs a symbol family with an eps parameter "
             "(radial or aniso)");
  if (c.kind == StudyKind::contraction && !eps_family)
    fail_cfg("the contraction study perturbs from the eps = 0 base problem "
             "and needs a radial or aniso symbol family");
  if (c.kind == StudyKind::c_sweep) {
    if (c.c_list.size() < 3)
      fail_cfg("the c sweep needs at least 3 c values for the rate fit");
    for (int j : c.J_list)
      if (j % 2 == 0)
        fail_cfg("the c sweep needs odd J (even truncations are unbounded "
                 "below)");
  }
}

GridSpec study_grid(const StudyConfig& c) {
  return make_grid(c.dim, c.n, c.box);
}

NonlinearityKind study_nonlinearity(const StudyConfig& c) {
  if (c.nonlinearity == "hartree")
    return NonlinearityKind::hartree(c.hartree_radius);
  return NonlinearityKind::power(c.k);
}

DispersionSymbol study_symbol_at(const StudyConfig& c, double eps) {
  if (c.symbol == "laplacian") return DispersionSymbol::laplacian();
  if (c.symbol == "radial")
    return DispersionSymbol::higher_order_radial(eps, c.radial_terms);
  if (c.symbol == "aniso")
    return DispersionSymbol::higher_order_aniso(eps, c.aniso_terms);
  if (c.symbol == "truncation")
    return DispersionSymbol::relativistic_truncation(c.mass, c.light_speed,
                                                     c.J);
  if (c.symbol == "pseudo_relativistic")
    return DispersionSymbol::pseudo_relativistic(c.mass, c.light_speed);
  fail_cfg("unknown symbol family '" + c.symbol + "'");
}

DispersionSymbol study_symbol(const StudyConfig& c) {
  return study_symbol_at(c, c.eps);
}

SolverConfig study_solver_config(const StudyConfig& c) {
  SolverConfig s;
  s.grad_tol = c.grad_tol;
  s.nehari_tol = c.nehari_tol;
  s.max_iters = c.max_iters;
  s.multistart = c.multistart;
  s.seed = c.seed;
  s.workers = c.workers;
  s.log_iterations = c.log_iterations;
  return s;
}

ContractionConfig study_contraction_config(const StudyConfig& c) {
  ContractionConfig t;
  t.fixed_point_tol = c.fixed_point_tol;
  t.inner_tol = c.inner_tol;
  t.inner_max_iters = c.inner_max_iters;
  t.max_outer = c.max_outer;
  t.beta0 = c.beta0;
  t.log_iterations = c.log_iterations;
  return t;
}

RateFit fit_rate(const std::vector<std::array<double, 2>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("rate fit: need at least 3 points");
  RateFit out;
  out.log_points.reserve(points.size());
  for (const auto& pt : points) {
    if (!(pt[0] > 0.0) || !(pt[1] > 0.0) || !std::isfinite(pt[0]) ||
        !std::isfinite(pt[1]))
      throw std::invalid_argument(
          "rate fit: parameters and errors must be positive and finite");
    out.log_points.push_back({std::log(pt[0]), std::log(pt[1])});
  }
  const std::size_t m = out.log_points.size();
  double mx = 0.0, my = 0.0;
  for (const auto& lp : out.log_points) {
    mx += lp[0];
    my += lp[1];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& lp : out.log_points) {
    sxx += (lp[0] - mx) * (lp[0] - mx);
    sxy += (lp[0] - mx) * (lp[1] - my);
  }
  if (sxx <= 1e-24 * static_cast<double>(m))
    throw std::invalid_argument("rate fit: degenerate abscissae");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  for (const auto& lp : out.log_points)
    out.max_residual = std::max(
        out.max_residual, std::abs(lp[1] - (out.slope * lp[0] + out.intercept)));
  return out;
}

GroundStateResult centered_ground_state(const GroundStateProblem& problem,
                                        const SolverConfig& cfg) {
  GroundStateResult res = minimize(problem, std::nullopt, cfg);
  if (!res.converged) return res;
  const DispersionSymbol metric = DispersionSymbol::laplacian();
  SolverConfig polish = cfg;
  polish.multistart = 1;
  for (int pass = 0; pass < 2; ++pass) {
    Field sym = symmetrize_radial(res.Q);
    AlignmentResult ar = align(res.Q, sym, metric);
    Field init = symmetrize_radial(ar.aligned);
    GroundStateResult next = minimize(problem, init, polish);
    if (!next.converged) return next;
    res = next;
  }
  return res;
}

GroundStudyResult run_groundstate(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::groundstate;
  validate_study_config(local);
  GroundStateProblem prob(study_grid(cfg), study_symbol(cfg),
                          study_nonlinearity(cfg));
  GroundStudyResult out;
  out.result = minimize(prob, std::nullopt, study_solver_config(cfg));
  if (out.result.converged)
    out.kernels = kernel_residuals(out.result.Q, prob.symbol, prob.kind);
  return out;
}

ContractionStudyResult run_contraction(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::contraction;
  validate_study_config(local);
  GridSpec grid = study_grid(cfg);
  NonlinearityKind kind = study_nonlinearity(cfg);
  GroundStateProblem base_prob(grid, DispersionSymbol::laplacian(), kind);
  ContractionStudyResult out;
  out.base = centered_ground_state(base_prob, study_solver_config(cfg));
  if (!out.base.converged)
    throw solver_failure(
        "contraction study: the base ground state did not converge: " +
        out.base.message);
  out.contraction = contraction_solve(out.base.Q, study_symbol(cfg), kind,
                                      study_contraction_config(cfg));
  return out;
}

SpectrumStudyResult run_spectrum(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::spectrum;
  validate_study_config(local);
  DispersionSymbol symbol = study_symbol(cfg);
  NonlinearityKind kind = study_nonlinearity(cfg);
  GroundStateProblem prob(study_grid(cfg), symbol, kind);
  SpectrumStudyResult out;
  out.ground = minimize(prob, std::nullopt, study_solver_config(cfg));
  if (!out.ground.converged)
    throw solver_failure(
        "spectrum study: the ground state did not converge: " +
        out.ground.message);
  const int n_eigs = std::max(cfg.n_eigs, cfg.dim + 2);
  EigensolveOptions eopt{cfg.eig_tol, cfg.eig_max_iters, cfg.seed};
  out.plus =
      beta_estimate(LinSign::plus, out.ground.Q, symbol, kind, n_eigs, eopt);
  out.minus =
      beta_estimate(LinSign::minus, out.ground.Q, symbol, kind, n_eigs, eopt);
  return out;
}

EpsSweepResult run_eps_sweep(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::eps_sweep;
  validate_study_config(local);
  const GridSpec grid = study_grid(cfg);
  const NonlinearityKind kind = study_nonlinearity(cfg);
  const DispersionSymbol base_symbol = DispersionSymbol::laplacian();
  const SolverConfig scfg = study_solver_config(cfg);

  EpsSweepResult out;
  GroundStateProblem base_prob(grid, base_symbol, kind);
  out.base = centered_ground_state(base_prob, scfg);
  if (!out.base.converged)
    throw solver_failure(
        "eps sweep: the base ground state did not converge: " +
        out.base.message);
  out.base_h1 = norm_weighted(out.base.Q, base_prob.tables().one_plus_xi2);

  const int n_eigs = std::max(cfg.n_eigs, cfg.dim + 2);
  const EigensolveOptions eopt{cfg.eig_tol, cfg.eig_max_iters, cfg.seed};
  SpectrumReport bp =
      beta_estimate(LinSign::plus, out.base.Q, base_symbol, kind, n_eigs, eopt);
  if (!bp.non_degenerate)
    throw solver_failure(
        "eps sweep: the base beta measurement failed: " + bp.message);
  out.beta0_plus = bp.beta;
  SpectrumReport bm = beta_estimate(LinSign::minus, out.base.Q, base_symbol,
                                    kind, n_eigs, eopt);
  out.beta0_minus = bm.beta;

  ContractionConfig ccfg = study_contraction_config(cfg);
  if (ccfg.beta0 <= 0.0) ccfg.beta0 = bp.beta;

  const std::size_t npts = cfg.eps_list.size();
  out.rows.resize(npts);
  out.var_fields.resize(npts);
  out.con_fields.resize(npts);

  auto run_point = [&](std::size_t i, const Field& warm) {
    EpsSweepRow row;
    row.eps = cfg.eps_list[i];
    std::vector<std::string> fails, notes;
    Field vq, cu;
    bool vok = false, cok = false;
    try {
      DispersionSymbol se = study_symbol_at(cfg, row.eps);
      GroundStateProblem pe(grid, se, kind);
      GroundStateResult vres = minimize(pe, warm, scfg);
      if (!vres.converged) throw solver_failure(vres.message);
      row.action = vres.action;
      row.pde_var = vres.pde_residual_rel;
      row.dist_var_base = align(vres.Q, out.base.Q, base_symbol).residual;
      SpectrumReport rp = beta_estimate(LinSign::plus, vres.Q, se, kind,
                                        n_eigs, eopt);
      row.beta_plus = rp.beta;
      if (!rp.non_degenerate) notes.push_back("beta_plus estimate unconverged");
      SpectrumReport rm = beta_estimate(LinSign::minus, vres.Q, se, kind,
                                        n_eigs, eopt);
      row.beta_minus = rm.beta;
      if (!rm.non_degenerate)
        notes.push_back("beta_minus estimate unconverged");
      vq = vres.Q;
      vok = true;
    } catch (const std::exception& e) {
      fails.push_back(std::string("variational: ") + e.what());
    }
    try {
      DispersionSymbol se = study_symbol_at(cfg, row.eps);
      ContractionResult cres = contraction_solve(out.base.Q, se, kind, ccfg);
      if (!cres.converged) throw solver_failure(cres.message);
      row.delta_eps = cres.delta_eps;
      row.pde_con = cres.pde_residual;
      row.contraction_factor = max_update_factor(cres);
      row.dist_con_base = align(cres.u, out.base.Q, base_symbol).residual;
      cu = cres.u;
      cok = true;
    } catch (const std::exception& e) {
      fails.push_back(std::string("contraction: ") + e.what());
    }
    if (vok && cok) row.dist_var_con = align(vq, cu, base_symbol).residual;
    row.ok = fails.empty();
    if (row.ok)
      row.status = notes.empty() ? "ok" : "ok (" + join(notes, "; ") + ")";
    else
      row.status = join(fails, "; ");
    row.status = sanitize_status(row.status);
    out.rows[i] = std::move(row);
    if (vok) out.var_fields[i] = std::move(vq);
    if (cok) out.con_fields[i] = std::move(cu);
  };

  int workers = std::min<int>(cfg.workers, static_cast<int>(npts));
  if (workers <= 1) {
    Field warm = out.base.Q;
    for (std::size_t i = 0; i < npts; ++i) {
      run_point(i, warm);
      if (out.rows[i].ok && out.var_fields[i].size() > 0)
        warm = out.var_fields[i];
    }
  } else {
    // concurrent points all start from the base solution so the result does
    // not depend on scheduling
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < npts;
             i += static_cast<std::size_t>(workers))
          run_point(i, out.base.Q);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<std::array<double, 2>> pts;
  for (const auto& row : out.rows)
    if (row.ok && row.eps > 0.0 && row.dist_var_base > 0.0)
      pts.push_back({row.eps, row.dist_var_base});
  if (pts.size() >= 3) {
    try {
      out.rate = fit_rate(pts);
      out.rate_valid = true;
    } catch (const std::exception&) {
      out.rate_valid = false;
    }
  }
  out.all_ok = std::all_of(out.rows.begin(), out.rows.end(),
                           [](const EpsSweepRow& r) { return r.ok; });
  return out;
}

CSweepResult run_c_sweep(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::c_sweep;
  validate_study_config(local);
  const GridSpec grid = study_grid(cfg);
  const NonlinearityKind kind = study_nonlinearity(cfg);
  const DispersionSymbol metric = DispersionSymbol::laplacian();
  const SolverConfig scfg = study_solver_config(cfg);

  const std::size_t nc = cfg.c_list.size();
  const std::size_t nj = cfg.J_list.size();
  CSweepResult out;
  out.rows.resize(nc * nj);
  out.full_fields.resize(nc * nj);
  out.trunc_fields.resize(nc * nj);

  auto run_point = [&](std::size_t jidx, std::size_t cidx,
                       const std::optional<Field>& warm_full,
                       const std::optional<Field>& warm_trunc) {
    const std::size_t idx = jidx * nc + cidx;
    CSweepRow row;
    row.c = cfg.c_list[cidx];
    row.J = cfg.J_list[jidx];
    std::vector<std::string> fails;
    try {
      DispersionSymbol sym_full =
          DispersionSymbol::pseudo_relativistic(cfg.mass, row.c);
      GroundStateProblem pf(grid, sym_full, kind);
      GroundStateResult fres = minimize(pf, warm_full, scfg);
      if (!fres.converged)
        throw solver_failure("full: " + fres.message);
      row.action_full = fres.action;
      row.pde_full = fres.pde_residual_rel;

      DispersionSymbol sym_tr =
          DispersionSymbol::relativistic_truncation(cfg.mass, row.c, row.J);
      GroundStateProblem pt(grid, sym_tr, kind);
      std::optional<Field> tinit = warm_trunc;
      if (!tinit) tinit = fres.Q; // the full state is a close first guess
      GroundStateResult tres = minimize(pt, tinit, scfg);
      if (!tres.converged)
        throw solver_failure("truncated: " + tres.message);
      row.action_trunc = tres.action;
      row.pde_trunc = tres.pde_residual_rel;
      row.error = align(tres.Q, fres.Q, metric).residual;
      out.full_fields[idx] = fres.Q;
      out.trunc_fields[idx] = tres.Q;
      row.ok = true;
      row.status = "ok";
    } catch (const std::exception& e) {
      row.ok = false;
      row.status = sanitize_status(e.what());
    }
    out.rows[idx] = std::move(row);
  };

  const std::size_t npts = nc * nj;
  int workers = std::min<int>(cfg.workers, static_cast<int>(npts));
  if (workers <= 1) {
    for (std::size_t jidx = 0; jidx < nj; ++jidx) {
      std::optional<Field> warm_full, warm_trunc;
      for (std::size_t cidx = 0; cidx < nc; ++cidx) {
        run_point(jidx, cidx, warm_full, warm_trunc);
        const std::size_t idx = jidx * nc + cidx;
        if (out.rows[idx].ok) {
          warm_full = out.full_fields[idx];
          warm_trunc = out.trunc_fields[idx];
        }
      }
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < npts;
             i += static_cast<std::size_t>(workers))
          run_point(i / nc, i % nc, std::nullopt, std::nullopt);
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t jidx = 0; jidx < nj; ++jidx) {
    CSweepJFit jf;
    jf.J = cfg.J_list[jidx];
    std::vector<std::array<double, 2>> pts;
    for (std::size_t cidx = 0; cidx < nc; ++cidx) {
      const auto& row = out.rows[jidx * nc + cidx];
      if (row.ok && row.error > 0.0) pts.push_back({row.c, row.error});
    }
    if (pts.size() < 3) {
      jf.note = "fewer than 3 valid points";
    } else {
      try {
        jf.fit = fit_rate(pts);
        jf.valid = true;
      } catch (const std::exception& e) {
        jf.note = e.what();
      }
    }
    out.fits.push_back(std::move(jf));
  }

  if (cfg.refine_largest) {
    // bound the discretization bias of the fitted rate at the stiffest point
    StudyConfig fine = cfg;
    fine.n = cfg.n * 2;
    const GridSpec fgrid = study_grid(fine);
    for (std::size_t jidx = 0; jidx < nj; ++jidx) {
      const std::size_t idx = jidx * nc + (nc - 1);
      const auto& row = out.rows[idx];
      if (!row.ok) continue;
      CSweepRefinement ref;
      ref.J = row.J;
      ref.c = row.c;
      ref.error_coarse = row.error;
      try {
        DispersionSymbol sym_full =
            DispersionSymbol::pseudo_relativistic(cfg.mass, row.c);
        GroundStateProblem pf(fgrid, sym_full, kind);
        GroundStateResult fres =
            minimize(pf, resample(out.full_fields[idx], fine.n), scfg);
        if (!fres.converged) continue;
        DispersionSymbol sym_tr =
            DispersionSymbol::relativistic_truncation(cfg.mass, row.c, row.J);
        GroundStateProblem pt(fgrid, sym_tr, kind);
        GroundStateResult tres =
            minimize(pt, resample(out.trunc_fields[idx], fine.n), scfg);
        if (!tres.converged) continue;
        ref.error_fine = align(tres.Q, fres.Q, metric).residual;
        ref.shift = std::abs(ref.error_fine - ref.error_coarse) /
                    ref.error_coarse;
        out.refinements.push_back(ref);
      } catch (const std::exception&) {
        // refinement is advisory; failures leave no entry
      }
    }
  }

  out.all_ok = std::all_of(out.rows.begin(), out.rows.end(),
                           [](const CSweepRow& r) { return r.ok; });
  return out;
}

VerifyReport run_verify(const StudyConfig& cfg) {
  StudyConfig local = cfg;
  local.kind = StudyKind::verify;
  validate_study_config(local);
  const GridSpec lattice =
      make_grid(cfg.lattice_dim, cfg.lattice_n, cfg.lattice_box);
  VerifyReport rep;

  rep.positivity_pass = true;
  for (int k : cfg.verify_k)
    for (const auto& mc : cfg.verify_mc) {
      PositivityEntry entry;
      entry.k = k;
      entry.m = mc[0];
      entry.c = mc[1];
      entry.report = verify_positivity_lemma(mc[0], mc[1], k, lattice);
      rep.positivity_pass = rep.positivity_pass && entry.report.pass;
      rep.positivity.push_back(std::move(entry));
    }

  rep.taylor_finite = true;
  for (int J : cfg.verify_J) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double c : cfg.verify_c) {
      TaylorEntry entry;
      entry.m = cfg.mass;
      entry.c = c;
      entry.J = J;
      entry.report = taylor_remainder_ratio(cfg.mass, c, J, cfg.taylor_s_max,
                                            cfg.taylor_samples);
      const double r = entry.report.sup_ratio;
      if (!std::isfinite(r) || !(r > 0.0)) rep.taylor_finite = false;
      if (first) {
        lo = hi = r;
        first = false;
      } else {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      rep.taylor.push_back(std::move(entry));
    }
    double drift = (lo > 0.0) ? hi / lo - 1.0 :
                                std::numeric_limits<double>::infinity();
    rep.taylor_drift.push_back({J, drift});
  }
  rep.taylor_stable = rep.taylor_finite;
  for (const auto& [J, drift] : rep.taylor_drift)
    if (!(drift < 0.2)) rep.taylor_stable = false;

  auto add_ellipticity = [&](const DispersionSymbol& sym) {
    EllipticityEntry entry;
    entry.symbol = sym.describe();
    entry.report = ellipticity_gamma(sym, lattice);
    rep.ellipticity.push_back(std::move(entry));
  };
  add_ellipticity(DispersionSymbol::laplacian());
  if (cfg.symbol == "radial")
    add_ellipticity(DispersionSymbol::higher_order_radial(cfg.eps,
                                                          cfg.radial_terms));
  if (cfg.symbol == "aniso")
    add_ellipticity(DispersionSymbol::higher_order_aniso(cfg.eps,
                                                         cfg.aniso_terms));
  for (const auto& mc : cfg.verify_mc) {
    add_ellipticity(DispersionSymbol::pseudo_relativistic(mc[0], mc[1]));
    for (int J : cfg.verify_J)
      if (J % 2 == 1)
        add_ellipticity(
            DispersionSymbol::relativistic_truncation(mc[0], mc[1], J));
  }
  rep.ellipticity_pass = true;
  for (const auto& entry : rep.ellipticity)
    rep.ellipticity_pass = rep.ellipticity_pass && entry.report.pass;

  // Same band-limited fields on both grids: draw on the coarse grid, extend
  // spectrally to the doubled one. The shift then isolates the quadrature
  // and aliasing error of the discrete form rather than resampling noise.
  auto add_multilinear = [&](const std::string& form,
                             const NonlinearityKind& kind, int dim, int n,
                             double box) {
    const GridSpec g = make_grid(dim, n, box);
    const int nfields = kind.order_p();
    double coarse = 0.0, fine = 0.0;
    for (int i = 0; i < cfg.multilinear_samples; ++i) {
      std::vector<Field> fields, refined;
      fields.reserve(static_cast<std::size_t>(nfields));
      refined.reserve(static_cast<std::size_t>(nfields));
      for (int j = 0; j < nfields; ++j) {
        fields.push_back(random_smooth_field(
            g, cfg.seed + 131 * static_cast<std::uint64_t>(i) +
                   static_cast<std::uint64_t>(j),
            cfg.multilinear_decay));
        refined.push_back(resample(fields.back(), 2 * n));
      }
      coarse = std::max(coarse, multilinear_ratio(fields, kind));
      fine = std::max(fine, multilinear_ratio(refined, kind));
    }
    rep.multilinear.push_back({form, n, coarse});
    rep.multilinear.push_back({form, 2 * n, fine});
    const double shift = std::abs(fine - coarse) / std::max(coarse, 1e-300);
    rep.multilinear_shift.push_back({form, shift});
  };
  add_multilinear("power", NonlinearityKind::power(cfg.k), cfg.dim, cfg.n,
                  cfg.box);
  add_multilinear("hartree", NonlinearityKind::hartree(cfg.hartree_radius), 3,
                  cfg.multilinear_n, cfg.multilinear_box);
  rep.multilinear_stable = true;
  for (const auto& [form, shift] : rep.multilinear_shift)
    if (!(shift < 0.1)) rep.multilinear_stable = false;

  rep.all_pass = rep.positivity_pass && rep.taylor_finite &&
                 rep.taylor_stable && rep.ellipticity_pass &&
                 rep.multilinear_stable;
  return rep;
}

} // namespace honls
