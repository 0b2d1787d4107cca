// ld: Lagrangian descriptor fields, contours, line scans and claim checks.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "lagdesc/lagdesc.hpp"

namespace fs = std::filesystem;
using namespace lagdesc;
using io::Json;

namespace {

constexpr int kExitClaimFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw UsageError("not a number: '" + std::string(s) + "'");
  return v;
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  std::string known;
  for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown coordinate '" + name + "' (expected one of: " + known + ")");
}

/// "x:-1:1,y:-1:1" -> Region ordered like `names`.
Region parse_region(const std::string& text, const std::vector<std::string>& names) {
  Region r;
  r.axes.assign(names.size(), Interval{});
  std::vector<bool> seen(names.size(), false);
  for (const auto& part : split(text, ',')) {
    const auto f = split(part, ':');
    if (f.size() != 3) throw UsageError("region component must look like name:min:max, got '" + part + "'");
    const auto i = index_of(names, f[0]);
    r.axes[i] = {parse_double(f[1]), parse_double(f[2])};
    seen[i] = true;
  }
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!seen[i]) throw UsageError("region does not cover coordinate '" + names[i] + "'");
  return r;
}

/// "201x201" or "51x51x51".
std::vector<std::size_t> parse_resolution(const std::string& text) {
  std::vector<std::size_t> res;
  for (const auto& part : split(text, 'x')) {
    const double v = parse_double(part);
    if (v < 2 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw UsageError("resolution entries must be integers >= 2");
    res.push_back(static_cast<std::size_t>(v));
  }
  return res;
}

/// "x=1.1,y:-2:2": fixed coordinates plus exactly one ranged coordinate.
verify::LineGeometry parse_line(const std::string& text, const std::vector<std::string>& names, std::size_t samples) {
  State base(names.size(), 0.0);
  std::vector<bool> seen(names.size(), false);
  std::optional<std::size_t> axis;
  Interval range;
  for (const auto& part : split(text, ',')) {
    if (auto eq = part.find('='); eq != std::string::npos) {
      const auto i = index_of(names, part.substr(0, eq));
      base[i] = parse_double(std::string_view(part).substr(eq + 1));
      seen[i] = true;
    } else {
      const auto f = split(part, ':');
      if (f.size() != 3) throw UsageError("line component must be name=value or name:min:max, got '" + part + "'");
      if (axis) throw UsageError("a line has exactly one ranged coordinate");
      axis = index_of(names, f[0]);
      range = {parse_double(f[1]), parse_double(f[2])};
      seen[*axis] = true;
    }
  }
  if (!axis) throw UsageError("line needs one ranged coordinate (name:min:max)");
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!seen[i]) throw UsageError("line does not fix coordinate '" + names[i] + "'");
  if (!(range.lo < range.hi)) throw UsageError("line range needs min < max");
  return verify::axis_line(base, *axis, range, samples);
}

unsigned default_workers() {
  if (const char* env = std::getenv("LD_WORKERS")) {
    try {
      const double v = parse_double(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const UsageError&) {
    }
  }
  return 1;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << content;
}

struct ModelChoice {
  std::string label;
  std::optional<FlowSystem> flow;
  std::optional<DiscreteMap2D> map;
  std::vector<std::string> variables;
};

ModelChoice choose_model(const std::string& system, const std::string& config) {
  ModelChoice m;
  if (!config.empty()) {
    if (!system.empty()) throw UsageError("use either --system or --config, not both");
    m.flow = system_from_file(config);
    m.label = m.flow->name;
    m.variables = m.flow->variables;
    return m;
  }
  if (system.empty()) throw UsageError("--system or --config is required");
  auto entry = find_entry(system);
  m.label = entry.name;
  if (entry.is_flow()) {
    m.flow = std::get<FlowSystem>(entry.model);
    m.variables = m.flow->variables;
  } else {
    m.map = std::get<DiscreteMap2D>(entry.model);
    m.variables = {"x", "y"};
  }
  return m;
}

struct Common {
  std::string system;
  std::string config;
  std::string descriptor = "M";
  double tau = 20.0;
  double t0 = 0.0;
  double p = 0.5;
  int N = 10;
  std::string speed = "phase";
  std::string out = ".";
  std::string formats = "csv,json";
  unsigned workers = default_workers();
  double rtol = IntegratorConfig{}.rel_tol;
  double atol = IntegratorConfig{}.abs_tol;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--system", system, "catalog system name (see `ld list`)");
    cmd->add_option("--config", config, "JSON system configuration file");
    cmd->add_option("--descriptor", descriptor, "M, Mf, Mb, Lf or MDp")
        ->check(CLI::IsMember({"M", "Mf", "Mb", "Lf", "MDp"}));
    cmd->add_option("--tau", tau, "integration half-window")->check(CLI::PositiveNumber);
    cmd->add_option("--t0", t0, "reference time");
    cmd->add_option("--p", p, "MD_p exponent, 0 < p < 1");
    cmd->add_option("--N", N, "MD_p iterations each way")->check(CLI::PositiveNumber);
    cmd->add_option("--speed", speed, "L_f integrand: phase or configuration")
        ->check(CLI::IsMember({"phase", "configuration"}));
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--format", formats, "comma-separated subset of csv,json,svg");
    cmd->add_option("--workers", workers, "worker threads (default $LD_WORKERS or 1)")->check(CLI::PositiveNumber);
    cmd->add_option("--rtol", rtol, "integrator relative tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--atol", atol, "integrator absolute tolerance")->check(CLI::PositiveNumber);
  }

  DescriptorSpec spec() const {
    DescriptorSpec s;
    s.kind = descriptor_kind_from_string(descriptor);
    s.tau = tau;
    s.t0 = t0;
    s.p = p;
    s.N = N;
    s.speed = speed == "phase" ? SpeedNorm::Phase : SpeedNorm::Configuration;
    return s;
  }

  IntegratorConfig integrator() const {
    IntegratorConfig c;
    c.rel_tol = rtol;
    c.abs_tol = atol;
    return c;
  }

  std::vector<std::string> format_list() const {
    auto list = split(formats, ',');
    for (const auto& f : list)
      if (f != "csv" && f != "json" && f != "svg") throw UsageError("unknown output format '" + f + "'");
    return list;
  }

  bool wants(const std::string& f) const {
    for (const auto& x : format_list())
      if (x == f) return true;
    return false;
  }

  /// Everything that determines the output content (worker count and output
  /// directory do not).
  Json run_config(const std::string& command) const {
    Json j;
    j["command"] = command;
    if (!system.empty()) j["system"] = system;
    if (!config.empty()) j["config"] = config;
    j["descriptor"] = io::to_json(spec());
    j["rtol"] = rtol;
    j["atol"] = atol;
    j["formats"] = format_list();
    return j;
  }

  fs::path out_dir() const {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw UsageError("cannot create output directory " + out);
    return dir;
  }
};

int cmd_list(bool as_json) {
  const auto entries = catalog();
  if (as_json) {
    Json arr = Json::array();
    for (const auto& e : entries) {
      Json j;
      j["name"] = e.name;
      j["kind"] = e.is_flow() ? "flow" : "map";
      j["dimension"] = e.dimension();
      j["note"] = e.note;
      if (e.is_flow()) {
        const auto& f = std::get<FlowSystem>(e.model);
        j["variables"] = f.variables;
        j["incompressible"] = f.incompressible;
        j["closed_form_m"] = f.oracle && static_cast<bool>(f.oracle->m_value);
      }
      arr.push_back(std::move(j));
    }
    std::cout << arr.dump(2) << "\n";
    return 0;
  }
  for (const auto& e : entries) {
    std::string name = e.name;
    name.resize(std::max<std::size_t>(name.size(), 17), ' ');
    std::cout << name << (e.is_flow() ? "flow " : "map  ") << e.dimension() << "D  " << e.note << "\n";
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& region_text, const std::string& res_text,
              const std::string& levels_text, const std::string& level_mode) {
  const auto model = choose_model(c.system, c.config);
  const auto spec = c.spec();
  Region region;
  if (!region_text.empty()) {
    region = parse_region(region_text, model.variables);
  } else if (model.flow) {
    region.axes = model.flow->reference_region;
  } else {
    region.axes = {{-1.0, 1.0}, {-1.0, 1.0}};
  }
  auto res = res_text.empty() ? std::vector<std::size_t>(region.dimension(), 201) : parse_resolution(res_text);

  ScalarField field;
  if (model.flow) {
    if (spec.kind == DescriptorKind::MDp) throw UsageError("MDp needs a discrete map system");
    field = sweep(*model.flow, spec, region, res, c.integrator(), c.workers);
  } else {
    if (spec.kind != DescriptorKind::MDp) throw UsageError(model.label + " is a map; use --descriptor MDp");
    field = sweep(*model.map, spec, region, res, c.workers);
  }

  Json cfg = c.run_config("sweep");
  cfg["region"] = io::to_json(region);
  cfg["resolution"] = res;
  cfg["levels"] = levels_text;
  cfg["level_mode"] = level_mode;

  const auto dir = c.out_dir();
  const std::string stem = model.label + "_" + std::string(to_string(spec.kind));
  if (c.wants("csv")) write_file(dir / (stem + "_field.csv"), io::field_to_csv(field, cfg));
  if (c.wants("json")) write_file(dir / (stem + "_field.json"), io::field_to_json(field, cfg).dump(1) + "\n");

  if (region.dimension() == 2 && (c.wants("svg") || c.wants("json"))) {
    std::vector<double> levels;
    if (levels_text.find(',') != std::string::npos) {
      for (const auto& part : split(levels_text, ',')) levels.push_back(parse_double(part));
    } else {
      const double count = parse_double(levels_text);
      if (count < 1) throw UsageError("--levels needs a positive count or a comma-separated list");
      levels = level_mode == "quantile" ? quantile_levels(field, static_cast<std::size_t>(count))
                                        : equal_levels(field, static_cast<std::size_t>(count));
    }
    const auto set = contours(field, levels);
    if (c.wants("json")) write_file(dir / (stem + "_contours.json"), io::contours_to_json(set, cfg).dump(1) + "\n");
    if (c.wants("svg"))
      write_file(dir / (stem + "_contours.svg"),
                 io::contours_to_svg(set, region, cfg, model.variables[0], model.variables[1]));
  }

  std::cout << "swept " << field.values.size() << " nodes";
  if (!field.failures.empty()) std::cout << " (" << field.failures.size() << " failed)";
  const auto [lo, hi] = finite_range(field);
  std::cout << ", range [" << io::num(lo) << ", " << io::num(hi) << "] -> " << dir.string() << "\n";
  return 0;
}

int cmd_scan(const Common& c, const std::string& line_text, std::size_t samples) {
  const auto model = choose_model(c.system, c.config);
  const auto spec = c.spec();
  if (samples < 2) throw UsageError("--samples must be at least 2");
  const auto line = parse_line(line_text, model.variables, samples);
  const auto cfg_int = c.integrator();
  verify::LineScan scan;
  if (model.flow) {
    if (spec.kind == DescriptorKind::MDp) throw UsageError("MDp needs a discrete map system");
    scan = verify::scan_line(line, [&](std::span<const double> x) { return evaluate(*model.flow, spec, x, cfg_int); });
  } else {
    if (spec.kind != DescriptorKind::MDp) throw UsageError(model.label + " is a map; use --descriptor MDp");
    scan = verify::scan_line(line, [&](std::span<const double> x) { return evaluate(*model.map, spec, x); });
  }
  Json cfg = c.run_config("scan");
  cfg["line"] = line_text;
  cfg["samples"] = samples;
  const auto dir = c.out_dir();
  const std::string stem = model.label + "_" + std::string(to_string(spec.kind)) + "_scan";
  std::size_t axis = 0;
  for (std::size_t i = 0; i < line.direction.size(); ++i)
    if (line.direction[i] != 0.0) axis = i;
  if (c.wants("csv")) write_file(dir / (stem + ".csv"), io::scan_to_csv(scan, cfg));
  if (c.wants("json")) write_file(dir / (stem + ".json"), io::scan_to_json(scan, cfg).dump(1) + "\n");
  if (c.wants("svg")) write_file(dir / (stem + ".svg"), io::scan_to_svg(scan, cfg, model.variables[axis]));
  std::cout << "argmin " << model.variables[axis] << " = " << io::num(scan.argmin) << " (value "
            << io::num(scan.min_value) << ") -> " << dir.string() << "\n";
  return 0;
}

int cmd_verify(const std::vector<std::string>& claims, const std::string& out, unsigned workers, double rtol,
               double atol) {
  std::vector<std::string> ids = claims;
  const auto known = verify::claim_ids();
  if (ids.empty())
    for (const auto& k : known) ids.push_back(k.id);
  for (const auto& id : ids) {
    bool found = false;
    for (const auto& k : known) found = found || k.id == id;
    if (!found) throw UsageError("unknown claim '" + id + "'");
  }
  IntegratorConfig cfg;
  cfg.rel_tol = rtol;
  cfg.abs_tol = atol;

  std::vector<verify::VerificationReport> reports;
  bool any_fail = false, any_error = false;
  std::printf("%-26s %-6s %9s  %s\n", "claim", "result", "seconds", "detail");
  for (const auto& id : ids) {
    auto r = verify::run_claim(id, cfg, workers);
    std::string detail = r.failure;
    if (detail.empty())
      for (const auto& [k, v] : r.measured) {
        if (detail.size() > 90) break;
        detail += (detail.empty() ? "" : "  ") + k + "=" + io::num(v);
      }
    std::printf("%-26s %-6s %9.2f  %s\n", r.claim.c_str(), r.pass ? "PASS" : "FAIL", r.seconds, detail.c_str());
    std::fflush(stdout);
    any_fail = any_fail || !r.pass;
    any_error = any_error || !r.failure.empty();
    reports.push_back(std::move(r));
  }
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  write_file(dir / "verify_report.json", io::reports_to_json(reports).dump(2) + "\n");
  if (any_error) return kExitNumerical;
  return any_fail ? kExitClaimFailed : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian descriptors: fields, contours, line scans and claim checks"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list the system catalog");
  bool list_json = false;
  list->add_flag("--json", list_json, "machine-readable output");

  Common sweep_opts;
  std::string region, res, levels = "30", level_mode = "equal";
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a descriptor on a grid");
  sweep_opts.add_to(sweep_cmd);
  sweep_cmd->add_option("--region", region, "e.g. x:-1:1,y:-1:1 (default: system reference box)");
  sweep_cmd->add_option("--res", res, "e.g. 201x201");
  sweep_cmd->add_option("--levels", levels, "contour level count or comma-separated list");
  sweep_cmd->add_option("--level-mode", level_mode, "equal or quantile")->check(CLI::IsMember({"equal", "quantile"}));

  Common scan_opts;
  scan_opts.tau = 2.0;
  scan_opts.descriptor = "Lf";
  scan_opts.formats = "csv,json";
  std::string line;
  std::size_t samples = 2001;
  auto* scan_cmd = app.add_subcommand("scan", "evaluate a descriptor along a line");
  scan_opts.add_to(scan_cmd);
  scan_cmd->add_option("--line", line, "e.g. x=1.1,y:-2:2")->required();
  scan_cmd->add_option("--samples", samples, "number of samples");

  std::vector<std::string> claims;
  std::string verify_out = ".";
  unsigned verify_workers = default_workers();
  double verify_rtol = IntegratorConfig{}.rel_tol, verify_atol = IntegratorConfig{}.abs_tol;
  auto* verify_cmd = app.add_subcommand("verify", "run the claim checks");
  verify_cmd->add_option("--claim", claims, "claim id (repeatable); default all");
  verify_cmd->add_option("--out", verify_out, "directory for verify_report.json");
  verify_cmd->add_option("--workers", verify_workers, "worker threads")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--rtol", verify_rtol, "integrator relative tolerance")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--atol", verify_atol, "integrator absolute tolerance")->check(CLI::PositiveNumber);
  bool list_claims = false;
  verify_cmd->add_flag("--list", list_claims, "list claim ids and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (list->parsed()) return cmd_list(list_json);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, region, res, levels, level_mode);
    if (scan_cmd->parsed()) return cmd_scan(scan_opts, line, samples);
    if (verify_cmd->parsed()) {
      if (list_claims) {
        for (const auto& c : verify::claim_ids()) std::cout << c.id << "  " << c.summary << "\n";
        return 0;
      }
      return cmd_verify(claims, verify_out, verify_workers, verify_rtol, verify_atol);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::NotInCatalog:
      case ErrorKind::InvalidArgument:
      case ErrorKind::ConfigError:
      case ErrorKind::SyntaxError:
      case ErrorKind::UnknownIdentifier:
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
      default:
        std::cerr << "numerical failure [" << e.tag() << "]: " << e.what() << "\n";
        return kExitNumerical;
    }
  }
  return 0;
}
