#include "twopath_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "twopath/errors.hpp"
#include "twopath/format.hpp"
#include "twopath/interferometer.hpp"
#include "twopath/layout_dsl.hpp"
#include "twopath/oracle.hpp"
#include "twopath/sweep.hpp"

namespace twopath::cli {
namespace {

// Raised for anything the user has to fix in the input; maps to exit 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_real(std::string_view text) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw InputError("not a finite number: '" + std::string(text) + "'");
  }
  return value;
}

double parse_angle(std::string_view text) {
  if (text.size() >= 2 && text.substr(text.size() - 2) == "pi") {
    const std::string_view factor = text.substr(0, text.size() - 2);
    if (factor.empty()) return std::numbers::pi;
    if (factor == "-") return -std::numbers::pi;
    return parse_real(factor) * std::numbers::pi;
  }
  return parse_real(text);
}

std::string read_source(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Parses the layout file, printing diagnostics; nullopt means exit 2.
std::optional<LayoutDocument> load(const std::string& path, std::ostream& err) {
  const std::string text = read_source(path);
  ParseResult result = parse(text);
  for (const auto& d : result.diagnostics) err << format_diagnostic(d, path);
  if (!result.ok()) return std::nullopt;
  const LayoutDocument& doc = *result.document;
  if (hierarchy_warning(doc.particle)) {
    err << "warning: ell * k = " << format_double(doc.particle.ell * doc.particle.k)
        << " is below " << format_double(kHierarchyMin)
        << "; the decay length is not long compared with the wavelength\n";
  }
  return std::move(result.document);
}

// Routes output to --out when given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw InputError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Options {
  std::string file;
  std::string out_path;
  std::string phases = "0:2pi:101";
  double duality_tol = kDualityTolerance;
  std::optional<double> oracle_tol;
  std::optional<double> packet_width;
  std::optional<double> dx;
  std::optional<double> dt;
  std::optional<std::string> param;
  std::optional<double> start;
  std::optional<double> end;
  std::optional<int> steps;
  std::optional<std::string> scale;
  unsigned threads = 0;
};

int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  const std::vector<double> phases = parse_phase_grid(opt.phases);
  const auto doc = load(opt.file, err);
  if (!doc) return kExitInputError;
  validate(doc->layout);

  std::vector<DetectionProbabilities> rows;
  rows.reserve(phases.size());
  for (double phi : phases) rows.push_back(detection_probabilities(doc->layout, doc->particle, phi));
  if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.saturated; })) {
    err << "warning: theta_cav = " << format_double(theta_cav(doc->layout, doc->particle))
        << " saturates the cosh/sech evaluation; interference term set to zero\n";
  }

  Sink sink(opt.out_path, out);
  std::ostream& os = sink.get();
  os << "phi,p1,p2,survival\n";
  for (const auto& r : rows) {
    os << format_double(r.phase) << ',' << format_double(r.p1) << ',' << format_double(r.p2) << ','
       << format_double(r.survival) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto doc = load(opt.file, err);
  if (!doc) return kExitInputError;
  validate(doc->layout);

  const bool any_flag = opt.param || opt.start || opt.end || opt.steps || opt.scale;
  if (!doc->sweep && !(opt.param && opt.start && opt.end && opt.steps)) {
    throw InputError(any_flag ? "sweep needs --param, --start, --end and --steps when the layout "
                                "has no sweep section"
                              : "no sweep section in the layout and no --param given");
  }
  SweepSpec spec = doc->sweep.value_or(SweepSpec{});
  if (opt.param) {
    const auto p = parse_sweep_parameter(*opt.param);
    if (!p) throw InputError("unknown sweep parameter '" + *opt.param + "'");
    spec.parameter = *p;
  }
  if (opt.scale) {
    const auto s = parse_sweep_scale(*opt.scale);
    if (!s) throw InputError("unknown sweep scale '" + *opt.scale + "'");
    spec.scale = *s;
  }
  if (opt.start) spec.start = *opt.start;
  if (opt.end) spec.end = *opt.end;
  if (opt.steps) spec.steps = *opt.steps;
  validate(spec);

  const unsigned threads =
      opt.threads > 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto rows = run_sweep(doc->layout, doc->particle, spec, threads);
  const auto saturated = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.saturated; });
  if (saturated > 0) {
    err << "warning: " << saturated << " sweep point(s) saturated; reported as V = 0, P = 1\n";
  }

  Sink sink(opt.out_path, out);
  std::ostream& os = sink.get();
  os << "param,visibility,predictability,duality_sum\n";
  for (const auto& r : rows) {
    os << format_double(r.param) << ',' << format_double(r.visibility) << ','
       << format_double(r.predictability) << ',' << format_double(r.duality_sum) << '\n';
  }
  return kExitOk;
}

int cmd_duality(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto doc = load(opt.file, err);
  if (!doc) return kExitInputError;
  validate(doc->layout);

  const DualityReport r = duality_audit(doc->layout, doc->particle);
  Sink sink(opt.out_path, out);
  sink.get() << "visibility=" << format_double(r.visibility)
             << " predictability=" << format_double(r.predictability)
             << " duality_sum=" << format_double(r.duality_sum)
             << " theta_cav=" << format_double(r.theta_cav) << '\n';
  if (r.saturated) {
    err << "note: theta_cav = " << format_double(r.theta_cav)
        << " is saturated; the arms are fully distinguishable (V = 0, P = 1)\n";
  }
  if (std::abs(r.duality_sum - 1.0) > opt.duality_tol) {
    err << "error: |V^2 + P^2 - 1| = " << format_double(std::abs(r.duality_sum - 1.0))
        << " exceeds " << format_double(opt.duality_tol) << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

void print_report(std::ostream& os, const std::string& prefix, const OracleReport& r) {
  auto line = [&](const char* key, const std::string& value) {
    os << prefix << key << '=' << value << '\n';
  };
  line("measured_norm_decay", format_double(r.measured_norm_decay));
  line("predicted_norm_decay", format_double(r.predicted_norm_decay));
  line("relative_error", format_double(r.relative_error));
  line("phase_advance_measured", format_double(r.phase_advance_measured));
  line("phase_advance_predicted", format_double(r.phase_advance_predicted));
  line("phase_relative_error", format_double(r.phase_relative_error));
  line("packet_width", format_double(r.packet_width));
  line("grid_spacing", format_double(r.grid_spacing));
  line("time_step", format_double(r.time_step));
  line("grid_points", std::to_string(r.grid_points));
  line("steps", std::to_string(r.steps));
  line("passed", r.passed ? "true" : "false");
}

int cmd_oracle(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto doc = load(opt.file, err);
  if (!doc) return kExitInputError;
  validate(doc->layout);

  OracleSettings settings = doc->oracle.value_or(OracleSettings{});
  if (opt.packet_width) settings.packet_width = opt.packet_width;
  if (opt.dx) settings.dx = opt.dx;
  if (opt.dt) settings.dt = opt.dt;
  if (opt.oracle_tol) settings.tolerance = *opt.oracle_tol;

  struct ArmRun {
    const char* name;
    std::vector<Leg> legs;
    std::optional<OracleReport> report;
  };
  std::vector<ArmRun> arms{{"upper", legs_from_segments(doc->layout.upper), {}},
                           {"lower", legs_from_segments(doc->layout.lower), {}}};
  for (auto& arm : arms) {
    if (!arm.legs.empty()) arm.report = verify_path(doc->particle, arm.legs, settings);
  }

  Sink sink(opt.out_path, out);
  std::ostream& os = sink.get();
  bool passed = true;
  for (const auto& arm : arms) {
    const std::string prefix = std::string(arm.name) + '.';
    os << prefix << "legs=" << arm.legs.size() << '\n';
    for (std::size_t i = 0; i < arm.legs.size(); ++i) {
      os << prefix << "leg" << i << ".length=" << format_double(arm.legs[i].length) << '\n';
      os << prefix << "leg" << i << ".gamma_ratio=" << format_double(arm.legs[i].gamma_ratio) << '\n';
    }
    if (arm.report) {
      print_report(os, prefix, *arm.report);
      passed = passed && arm.report->passed;
    }
  }
  os << "tolerance=" << format_double(settings.tolerance) << '\n';
  os << "passed=" << (passed ? "true" : "false") << '\n';
  if (!passed) {
    err << "error: oracle deviation exceeds tolerance " << format_double(settings.tolerance) << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_fmt(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto doc = load(opt.file, err);
  if (!doc) return kExitInputError;
  Sink sink(opt.out_path, out);
  sink.get() << serialize(*doc);
  return kExitOk;
}

}  // namespace

std::vector<double> parse_phase_grid(const std::string& text) {
  const auto first = text.find(':');
  const auto second = first == std::string::npos ? first : text.find(':', first + 1);
  if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
    throw InputError("--phases expects start:end:count, got '" + text + "'");
  }
  const double start = parse_angle(std::string_view(text).substr(0, first));
  const double end = parse_angle(std::string_view(text).substr(first + 1, second - first - 1));
  const double count = parse_real(std::string_view(text).substr(second + 1));
  if (count != std::floor(count) || count < 1 || count > 1e8) {
    throw InputError("--phases count must be a positive integer");
  }
  if (count == 1) return {start};
  return linspace(start, end, static_cast<std::size_t>(count));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-path interferometer for unstable particles", "twopath"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", opt.file, "Layout file (.ifl), or - for standard input")->required();
    sub->add_option("--out", opt.out_path, "Write output to this path instead of standard output");
  };

  auto* simulate = app.add_subcommand("simulate", "Detection probabilities over a phase grid (CSV)");
  add_common(simulate);
  simulate->add_option("--phases", opt.phases, "Phase grid start:end:count, inclusive")
      ->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Visibility and predictability over a parameter sweep (CSV)");
  add_common(sweep);
  sweep->add_option("--param", opt.param, "gamma_ratio | cavity_length_over_ell | phase");
  sweep->add_option("--start", opt.start, "First sweep value");
  sweep->add_option("--end", opt.end, "Last sweep value");
  sweep->add_option("--steps", opt.steps, "Number of sweep points (>= 2)");
  sweep->add_option("--scale", opt.scale, "linear | log");
  sweep->add_option("--threads", opt.threads, "Worker threads (0 = hardware concurrency)");

  auto* duality = app.add_subcommand("duality", "Visibility, predictability and V^2 + P^2");
  add_common(duality);
  duality->add_option("--duality-tol", opt.duality_tol, "Allowed |V^2 + P^2 - 1|")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  auto* oracle = app.add_subcommand("oracle", "Check arm propagation against a wavepacket simulation");
  add_common(oracle);
  oracle->add_option("--oracle-tol", opt.oracle_tol,
                     "Allowed relative deviation (default 1e-4, or the layout's oracle tolerance)")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--packet-width", opt.packet_width, "Packet width (default 100 / k)")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--dx", opt.dx, "Coarse grid spacing")->check(CLI::PositiveNumber);
  oracle->add_option("--dt", opt.dt, "Coarse time step")->check(CLI::PositiveNumber);

  auto* fmt = app.add_subcommand("fmt", "Print the canonical form of a layout file");
  add_common(fmt);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt, out, err);
    if (sweep->parsed()) return cmd_sweep(opt, out, err);
    if (duality->parsed()) return cmd_duality(opt, out, err);
    if (oracle->parsed()) return cmd_oracle(opt, out, err);
    if (fmt->parsed()) return cmd_fmt(opt, out, err);
  } catch (const RegimeError& e) {
    err << "refused: " << e.what() << '\n';
    return kExitRegimeRefused;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const UndefinedQuantityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace twopath::cli
