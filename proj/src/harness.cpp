#include "sblfem/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "sblfem/errors.hpp"
#include "sblfem/solver.hpp"

namespace sblfem {

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return os.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << data;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

struct Line {
  int number;
  std::string value;
};

class ConfigReader {
 public:
  explicit ConfigReader(std::map<std::string, Line> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  double number(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return parse_double(it->second.value, key, it->second.number);
  }

  int integer(const std::string& key, int fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return parse_int(it->second.value, key, it->second.number);
  }

  std::vector<double> numbers(const std::string& key) const {
    auto it = entries_.find(key);
    std::vector<double> out;
    if (it == entries_.end()) return out;
    for (const auto& item : split_list(it->second.value))
      out.push_back(parse_double(item, key, it->second.number));
    if (out.empty()) fail(key, it->second.number, "empty list");
    return out;
  }

  /// "2..8" or "2, 3, 5"
  std::vector<int> integers(const std::string& key) const {
    auto it = entries_.find(key);
    std::vector<int> out;
    if (it == entries_.end()) return out;
    const std::string& v = it->second.value;
    auto dots = v.find("..");
    if (dots != std::string::npos) {
      int lo = parse_int(trim(v.substr(0, dots)), key, it->second.number);
      int hi = parse_int(trim(v.substr(dots + 2)), key, it->second.number);
      if (hi < lo) fail(key, it->second.number, "empty range");
      for (int k = lo; k <= hi; ++k) out.push_back(k);
      return out;
    }
    for (const auto& item : split_list(v)) out.push_back(parse_int(item, key, it->second.number));
    if (out.empty()) fail(key, it->second.number, "empty list");
    return out;
  }

  int line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.number;
  }

  [[noreturn]] static void fail(const std::string& key, int line, const std::string& why) {
    throw ConfigError("config line " + std::to_string(line) + ": " + key + ": " + why);
  }

 private:
  static double parse_double(const std::string& s, const std::string& key, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      fail(key, line, "not a number: '" + s + "'");
    return v;
  }
  static int parse_int(const std::string& s, const std::string& key, int line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      fail(key, line, "not an integer: '" + s + "'");
    return v;
  }

  std::map<std::string, Line> entries_;
};

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"domain", {"curve", "radius"}},
      {"mesh", {"m", "strip_fraction", "kappa"}},
      {"problem", {"eps1", "eps2", "p", "quad_order", "forcing", "coefficient"}},
      {"sweep", {"p", "eps1", "eps2", "mode"}},
      {"output", {"csv", "svg", "mesh", "solution", "reference"}},
  };
  return keys;
}

int winding_number(const BoundaryCurve& curve, const Vec2& q, double& min_distance) {
  const int n = 10000;
  double total = 0.0;
  min_distance = std::numeric_limits<double>::infinity();
  Vec2 prev = curve.position(0.0) - q;
  for (int i = 1; i <= n; ++i) {
    Vec2 cur = curve.position(curve.period() * i / n) - q;
    min_distance = std::min(min_distance, cur.norm());
    total += std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

void apply_forcing(ProblemConfig& config, const std::string& name) {
  if (name == "10x") {
    config.f = [](double x, double) { return 10.0 * x; };
  } else if (name == "inverse-distance") {
    double dist;
    const Vec2 q(-0.5, 0.0);
    int w = winding_number(config.curve, q, dist);
    if (w != 0 || dist < 1e-6)
      throw ConfigError("inverse-distance forcing is singular at (-1/2, 0), which lies in the "
                        "closed domain");
    config.f = [](double x, double y) { return 1.0 / std::sqrt((x + 0.5) * (x + 0.5) + y * y); };
  } else if (name == "manufactured-disk") {
    if (config.curve.kind() != CurveKind::Circle || config.curve.radius() != 1.0)
      throw ConfigError("manufactured-disk forcing needs the unit circle domain");
    ManufacturedCase mc{config.eps1, config.eps2};
    config.f = [mc](double x, double y) { return mc.f(x, y); };
  } else if (name == "zero") {
    config.f = [](double, double) { return 0.0; };
  } else {
    throw ConfigError("unknown forcing '" + name +
                      "' (expected 10x, inverse-distance, manufactured-disk or zero)");
  }
  config.forcing_name = name;
}

void refresh_forcing(ProblemConfig& config) {
  if (config.forcing_name == "manufactured-disk") apply_forcing(config, config.forcing_name);
}

void apply_coefficient(ProblemConfig& config, const std::string& spec) {
  std::vector<double> v;
  for (const auto& item : split_list(spec)) {
    double x;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw ConfigError("coefficient: not a number: '" + item + "'");
    v.push_back(x);
  }
  if (v.size() == 1) {
    double a = v[0];
    config.c = [a](double, double) { return a; };
  } else if (v.size() == 3) {
    double a = v[0], b = v[1], c = v[2];
    config.c = [a, b, c](double x, double y) { return a + b * x + c * y; };
  } else {
    throw ConfigError("coefficient must be 'a' or 'a b c' (a + b x + c y)");
  }
  config.coefficient_name = spec;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::map<std::string, Line>> sections;
  std::istringstream in(text);
  std::string raw, section;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = raw;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(number) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!allowed_keys().count(section))
        throw ConfigError("config line " + std::to_string(number) + ": unknown section [" +
                          section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config line " + std::to_string(number) + ": key outside a section");
    if (!allowed_keys().at(section).count(key))
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key +
                        "' in [" + section + "]");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (sections[section].count(key))
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    sections[section][key] = {number, value};
  }

  ConfigReader domain(sections["domain"]), mesh(sections["mesh"]), problem(sections["problem"]),
      sweep(sections["sweep"]), output(sections["output"]);

  RunConfig rc;
  ProblemConfig& pc = rc.problem;
  pc.curve = curve_from_name(domain.text("curve", "cranioid"), domain.number("radius", 1.0));
  pc.m = mesh.integer("m", 2);
  pc.strip_fraction = mesh.number("strip_fraction", 0.5);
  pc.kappa = mesh.number("kappa", 1.0);
  pc.eps1 = problem.number("eps1", 1e-11);
  pc.eps2 = problem.number("eps2", 1e-3);
  pc.p = problem.integer("p", 4);
  pc.quad_order = problem.integer("quad_order", 0);
  if (pc.m < 1) ConfigReader::fail("m", mesh.line("m"), "must be >= 1");
  if (!(pc.strip_fraction > 0.0 && pc.strip_fraction <= 0.5))
    ConfigReader::fail("strip_fraction", mesh.line("strip_fraction"), "must lie in (0, 1/2]");
  if (pc.quad_order < 0) ConfigReader::fail("quad_order", problem.line("quad_order"), "negative");
  apply_coefficient(pc, problem.text("coefficient", "1"));
  apply_forcing(pc, problem.text("forcing", "10x"));

  rc.p_list = sweep.has("p") ? sweep.integers("p") : std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10};
  rc.eps1_list = sweep.has("eps1") ? sweep.numbers("eps1") : std::vector<double>{pc.eps1};
  rc.eps2_list = sweep.has("eps2") ? sweep.numbers("eps2") : std::vector<double>{pc.eps2};
  const std::string mode = sweep.text("mode", "reference");
  if (mode == "reference") rc.mode = SweepMode::Reference;
  else if (mode == "exact") rc.mode = SweepMode::Exact;
  else ConfigReader::fail("mode", sweep.line("mode"), "expected reference or exact");
  if (rc.mode == SweepMode::Exact && pc.forcing_name != "manufactured-disk")
    ConfigReader::fail("mode", sweep.line("mode"), "exact mode needs forcing = manufactured-disk");
  for (int p : rc.p_list)
    if (p < 1) ConfigReader::fail("p", sweep.line("p"), "degrees must be >= 1");

  rc.paths = {output.text("csv", ""), output.text("svg", ""), output.text("mesh", ""),
              output.text("solution", ""), output.text("reference", "")};

  rc.warnings = validate_parameters(pc);
  for (double e1 : rc.eps1_list) {
    for (double e2 : rc.eps2_list) {
      ProblemConfig probe = pc;
      probe.eps1 = e1;
      probe.eps2 = e2;
      for (const auto& w : validate_parameters(probe))
        if (std::find(rc.warnings.begin(), rc.warnings.end(), w) == rc.warnings.end())
          rc.warnings.push_back(w);
    }
  }
  return rc;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

// ---------------------------------------------------------------------------
// Sweeps

SweepSpec make_sweep_spec(const RunConfig& rc) {
  SweepSpec spec;
  spec.base = rc.problem;
  spec.p_list = rc.p_list;
  spec.eps1_list = rc.eps1_list;
  spec.eps2_list = rc.eps2_list;
  spec.mode = rc.mode;
  return spec;
}

Solution make_reference(const ProblemConfig& config) {
  ProblemConfig ref = config;
  ref.p = config.p + 2;
  if (config.quad_order > 0) ref.quad_order = config.quad_order + 2;
  return solve_problem(ref);
}

namespace {

std::string tuple_text(int p, double e1, double e2) {
  std::ostringstream os;
  os << "(p = " << p << ", eps1 = " << e1 << ", eps2 = " << e2 << ")";
  return os.str();
}

template <class Task>
void run_parallel(int count, int threads, Task task) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::mutex mu;
  int next = 0;
  std::exception_ptr first;
  int first_index = count;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        int i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= count || first) return;
          i = next++;
        }
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          // Report the earliest failing task so the message is deterministic.
          if (i < first_index) first_index = i, first = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

template <class F>
auto with_context(const std::string& context, F f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(context + ": " + e.what(), e.index());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(context + ": " + e.what());
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec,
                                const std::function<void(const std::string&)>& log) {
  if (spec.p_list.empty() || spec.eps1_list.empty() || spec.eps2_list.empty())
    throw ConfigError("sweep lists must be nonempty");
  std::vector<int> ps = spec.p_list;
  std::vector<double> e1s = spec.eps1_list, e2s = spec.eps2_list;
  std::sort(ps.begin(), ps.end());
  std::sort(e1s.begin(), e1s.end());
  std::sort(e2s.begin(), e2s.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  e1s.erase(std::unique(e1s.begin(), e1s.end()), e1s.end());
  e2s.erase(std::unique(e2s.begin(), e2s.end()), e2s.end());

  // Validate every tuple before any solve.
  for (double e1 : e1s) {
    for (double e2 : e2s) {
      ProblemConfig probe = spec.base;
      probe.eps1 = e1;
      probe.eps2 = e2;
      with_context(tuple_text(ps.front(), e1, e2), [&] { return validate_parameters(probe); });
    }
  }

  auto base = build_asymptotic_mesh(spec.base.curve, spec.base.m, spec.base.strip_fraction);

  using Key = std::tuple<int, double, double>;
  std::set<Key> wanted;
  for (int p : ps)
    for (double e1 : e1s)
      for (double e2 : e2s) {
        wanted.insert({p, e1, e2});
        if (spec.mode == SweepMode::Reference) wanted.insert({p + 2, e1, e2});
      }
  std::vector<Key> keys(wanted.begin(), wanted.end());

  // Meshes are cheap: check c > 0 and the layer split for every solve up front.
  for (auto [p, e1, e2] : keys) {
    ProblemConfig c = spec.base;
    c.p = p;
    c.eps1 = e1;
    c.eps2 = e2;
    with_context(tuple_text(p, e1, e2), [&] {
      validate_parameters(c);
      validate_coefficient(c, *build_sbl_mesh(base, c.kappa, p, e1, e2));
      return 0;
    });
  }

  std::vector<Solution> solutions(keys.size());
  std::vector<double> seconds(keys.size(), 0.0);
  std::mutex log_mu;

  run_parallel(static_cast<int>(keys.size()), spec.threads, [&](int i) {
    auto [p, e1, e2] = keys[i];
    ProblemConfig c = spec.base;
    c.p = p;
    c.eps1 = e1;
    c.eps2 = e2;
    if (spec.base.quad_order > 0) c.quad_order = spec.base.quad_order + (p - spec.base.p);
    refresh_forcing(c);
    auto t0 = std::chrono::steady_clock::now();
    solutions[i] = with_context(tuple_text(p, e1, e2), [&] { return solve_problem(c, base); });
    seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
      std::lock_guard<std::mutex> lock(log_mu);
      std::ostringstream os;
      os << "solved " << tuple_text(p, e1, e2) << " dofs " << solutions[i].dofs() << " residual "
         << solutions[i].residual;
      log(os.str());
    }
  });
  auto find = [&](int p, double e1, double e2) {
    auto it = std::lower_bound(keys.begin(), keys.end(), Key{p, e1, e2});
    return static_cast<std::size_t>(it - keys.begin());
  };

  std::vector<Key> rows_keys;
  for (int p : ps)
    for (double e1 : e1s)
      for (double e2 : e2s) rows_keys.push_back({p, e1, e2});
  std::vector<SweepRow> rows(rows_keys.size());
  run_parallel(static_cast<int>(rows.size()), spec.threads, [&](int r) {
    auto [p, e1, e2] = rows_keys[r];
    const std::size_t i = find(p, e1, e2);
    const Solution& sol = solutions[i];
    ErrorReport rep = with_context(tuple_text(p, e1, e2), [&] {
      if (spec.mode == SweepMode::Exact) return error_against_exact(sol, ManufacturedCase{e1, e2});
      return error_against_reference(sol, solutions[find(p + 2, e1, e2)]);
    });
    SweepRow row;
    row.p = p;
    row.dofs = sol.dofs();
    row.eps1 = e1;
    row.eps2 = e2;
    row.energy_error = rep.energy_error;
    row.balanced_error = rep.balanced_error;
    row.solve_seconds = spec.omit_timing ? 0.0 : seconds[i];
    row.regime = to_string(sol.mesh->regime);
    row.residual = sol.residual;
    if (spec.mode == SweepMode::Reference) row.reference_residual = solutions[find(p + 2, e1, e2)].residual;
    rows[r] = row;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

const char* const kCsvHeader = "p,dofs,eps1,eps2,energy_error,balanced_error,solve_seconds,regime";

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string write_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.p) + "," + std::to_string(r.dofs) + "," + shortest(r.eps1) + "," +
           shortest(r.eps2) + "," + shortest(r.energy_error) + "," + shortest(r.balanced_error) +
           "," + shortest(r.solve_seconds) + "," + r.regime + "\n";
  }
  return out;
}

std::vector<SweepRow> read_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  auto fail = [&](const std::string& why) -> void {
    throw IoError("CSV line " + std::to_string(number) + ": " + why);
  };
  if (!std::getline(in, line)) {
    number = 1;
    fail("missing header");
  }
  ++number;
  if (trim(line) != kCsvHeader) fail("unexpected header '" + trim(line) + "'");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(trim(item));
    if (f.size() != 8) fail("expected 8 fields, found " + std::to_string(f.size()));
    SweepRow r;
    auto num = [&](const std::string& s, double& v) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail("not a number: '" + s + "'");
    };
    auto integer = [&](const std::string& s, int& v) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) fail("not an integer: '" + s + "'");
    };
    integer(f[0], r.p);
    integer(f[1], r.dofs);
    num(f[2], r.eps1);
    num(f[3], r.eps2);
    num(f[4], r.energy_error);
    num(f[5], r.balanced_error);
    num(f[6], r.solve_seconds);
    r.regime = f[7];
    if (r.regime != "asymptotic" && r.regime != "pre-asymptotic")
      fail("unknown regime '" + r.regime + "'");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sblfem
