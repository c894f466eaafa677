#include "pascalsim/scenario_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "pascalsim/ser_analytic.hpp"

namespace pascalsim {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

enum class Dim { Angle, Length, Frequency, Power, Decibel };

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::Angle: return "angle (deg|rad)";
    case Dim::Length: return "length (m|mm|km)";
    case Dim::Frequency: return "frequency (hz|khz|mhz|ghz)";
    case Dim::Power: return "power (w|mw)";
    case Dim::Decibel: return "level (db)";
  }
  return "?";
}

std::optional<double> unit_scale(Dim d, const std::string& u) {
  static const std::map<std::string, std::pair<Dim, double>> table{
      {"deg", {Dim::Angle, kDegree}},  {"rad", {Dim::Angle, 1.0}},       {"m", {Dim::Length, 1.0}},
      {"mm", {Dim::Length, 1e-3}},     {"km", {Dim::Length, 1e3}},       {"hz", {Dim::Frequency, 1.0}},
      {"khz", {Dim::Frequency, 1e3}},  {"mhz", {Dim::Frequency, 1e6}},   {"ghz", {Dim::Frequency, 1e9}},
      {"w", {Dim::Power, 1.0}},        {"mw", {Dim::Power, 1e-3}},       {"db", {Dim::Decibel, 1.0}},
  };
  auto it = table.find(u);
  if (it == table.end() || it->second.first != d) return std::nullopt;
  return it->second.second;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Parser {
 public:
  double number(const Entry& e, const std::string& key) const {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || trim(end) != "") throw ParseError(e.line, "'" + key + "' expects a plain number, got '" + v + "'");
    if (!std::isfinite(x)) throw ParseError(e.line, "'" + key + "' must be finite");
    return x;
  }

  long long integer(const Entry& e, const std::string& key) const {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || trim(end) != "") throw ParseError(e.line, "'" + key + "' expects an integer, got '" + v + "'");
    return x;
  }

  double quantity(const Entry& e, const std::string& key, Dim d) const {
    const std::string v = trim(e.value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str()) throw ParseError(e.line, "'" + key + "' expects a number with a unit, got '" + v + "'");
    const std::string unit = lower(trim(end));
    if (unit.empty()) throw ParseError(e.line, "'" + key + "' needs a unit: " + dim_name(d));
    const auto s = unit_scale(d, unit);
    if (!s) throw ParseError(e.line, "unit mismatch for '" + key + "': expected " + dim_name(d) + ", got '" + unit + "'");
    if (!std::isfinite(x)) throw ParseError(e.line, "'" + key + "' must be finite");
    return x * *s;
  }

  bool boolean(const Entry& e, const std::string& key) const {
    const std::string v = lower(trim(e.value));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ParseError(e.line, "'" + key + "' expects true|false, got '" + v + "'");
  }

  std::vector<std::string> list(const Entry& e) const {
    std::vector<std::string> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_modulation(const Entry& e, const Parser& p) {
  const std::string v = lower(trim(e.value));
  if (v == "bpsk") return 2;
  if (v == "qpsk") return 4;
  if (v == "8psk") return 8;
  if (v == "16psk") return 16;
  const long long m = p.integer(e, "modulation");
  if (m < 2 || m > 1024 || !is_power_of_two(static_cast<int>(m)))
    throw ParseError(e.line, "modulation must be bpsk|qpsk|8psk|16psk or a power of two >= 2");
  return static_cast<int>(m);
}

EqualizerKind parse_kind(const std::string& s, int line) {
  const std::string v = lower(s);
  if (v == "mrc") return EqualizerKind::MRC;
  if (v == "zf") return EqualizerKind::ZF;
  if (v == "mmse") return EqualizerKind::MMSE;
  throw ParseError(line, "unknown equalizer '" + s + "' (mrc|zf|mmse)");
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  // section -> key -> entry
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> section_line;
  std::string current;
  int line_no = 0;
  std::stringstream ss{std::string(text)};
  std::string raw;
  while (std::getline(ss, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header '" + line + "'");
      current = lower(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> known{"system", "frame", "errors", "equalizer", "sweep", "output"};
      const bool drone = current.rfind("drones.", 0) == 0;
      if (!drone && !known.count(current)) throw ParseError(line_no, "unknown section [" + current + "]");
      if (section_line.count(current)) throw ParseError(line_no, "duplicate section [" + current + "]");
      section_line[current] = line_no;
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    if (current.empty()) throw ParseError(line_no, "key outside of any section");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    auto& sec = sections[current];
    if (sec.count(key))
      throw ParseError(line_no, "duplicate key '" + key + "' in [" + current + "] (first set on line " +
                                    std::to_string(sec[key].line) + ")");
    sec[key] = {value, line_no};
  }

  const Parser p;
  ScenarioFile f;
  Scenario& sc = f.scenario;
  auto take = [&](const std::string& sec, const std::string& key) -> std::optional<Entry> {
    auto s = sections.find(sec);
    if (s == sections.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    Entry e = k->second;
    s->second.erase(k);
    return e;
  };
  auto need = [&](const std::string& sec, const std::string& key) {
    auto e = take(sec, key);
    if (!e) {
      const int l = section_line.count(sec) ? section_line[sec] : 0;
      throw ParseError(l, "missing required key '" + key + "' in [" + sec + "]");
    }
    return *e;
  };

  // [system]
  if (!sections.count("system")) throw ParseError(0, "missing [system] section");
  {
    const Entry e = need("system", "antennas");
    const long long n = p.integer(e, "antennas");
    if (n < 1 || n > 4096) throw ParseError(e.line, "antennas must lie in 1..4096");
    sc.system.n_antennas = static_cast<int>(n);
  }
  sc.system.wavelength = p.quantity(need("system", "wavelength"), "wavelength", Dim::Length);
  if (auto e = take("system", "element_spacing")) sc.system.element_spacing = p.quantity(*e, "element_spacing", Dim::Length);
  sc.system.sample_rate = p.quantity(need("system", "sample_rate"), "sample_rate", Dim::Frequency);
  {
    auto snr = take("system", "snr");
    auto nv = take("system", "noise_variance");
    if (snr && nv) throw ParseError(nv->line, "give either 'snr' or 'noise_variance', not both");
    if (snr) sc.snr_db = p.quantity(*snr, "snr", Dim::Decibel);
    else if (nv) sc.system.noise_variance = p.quantity(*nv, "noise_variance", Dim::Power);
    else throw ParseError(section_line["system"], "[system] needs 'snr' or 'noise_variance'");
  }

  // [drones.k]
  std::map<int, std::string> drone_sections;
  for (const auto& [name, keys] : sections) {
    if (name.rfind("drones.", 0) != 0) continue;
    const std::string idx = name.substr(7);
    char* end = nullptr;
    const long k = std::strtol(idx.c_str(), &end, 10);
    if (idx.empty() || *end != '\0' || k < 1) throw ParseError(section_line[name], "drone sections are [drones.1], [drones.2], ...");
    drone_sections[static_cast<int>(k)] = name;
  }
  if (drone_sections.empty()) throw ParseError(0, "at least one [drones.k] section is required");
  int expect = 1;
  for (const auto& [k, name] : drone_sections) {
    if (k != expect) throw ParseError(section_line[name], "drone sections must be numbered 1.." + std::to_string(drone_sections.size()));
    ++expect;
    DroneParams d;
    ParamTriple sig;
    d.doa = p.quantity(need(name, "doa"), "doa", Dim::Angle);
    d.range = p.quantity(need(name, "range"), "range", Dim::Length);
    d.doppler = p.quantity(need(name, "doppler"), "doppler", Dim::Frequency);
    if (auto e = take(name, "power")) d.power = p.quantity(*e, "power", Dim::Power);
    if (auto e = take(name, "sigma_doa")) sig.doa = p.quantity(*e, "sigma_doa", Dim::Angle);
    if (auto e = take(name, "sigma_range")) sig.range = p.quantity(*e, "sigma_range", Dim::Length);
    if (auto e = take(name, "sigma_doppler")) sig.doppler = p.quantity(*e, "sigma_doppler", Dim::Frequency);
    sc.drones.push_back(d);
    sc.error_model.sigmas.push_back(sig);
  }

  // [frame]
  if (auto e = take("frame", "pilots")) sc.frame.n_subframes = static_cast<int>(p.integer(*e, "pilots"));
  else sc.frame.n_subframes = 30;
  if (auto e = take("frame", "symbols")) sc.frame.symbols_per_subframe = static_cast<int>(p.integer(*e, "symbols"));
  else sc.frame.symbols_per_subframe = 100;
  if (auto e = take("frame", "modulation")) sc.frame.modulation_order = parse_modulation(*e, p);

  // [errors]
  if (auto e = take("errors", "source")) {
    const std::string v = lower(e->value);
    if (v == "aoml") sc.error_source = ErrorSource::AoMl;
    else if (v == "sampled") sc.error_source = ErrorSource::SampledModel;
    else throw ParseError(e->line, "source must be aoml|sampled");
  }
  if (auto e = take("errors", "calibration_trials")) {
    const long long n = p.integer(*e, "calibration_trials");
    if (n < 0) throw ParseError(e->line, "calibration_trials must be >= 0");
    f.calibration_trials = static_cast<std::size_t>(n);
  }
  if (auto e = take("errors", "theta_bound")) {
    const double b = p.quantity(*e, "theta_bound", Dim::Angle);
    if (!(b > 0.0)) throw ParseError(e->line, "theta_bound must be positive");
    sc.error_model.theta_bounds = {-b, b};
  }
  if (auto e = take("errors", "doppler_span")) sc.error_model.doppler_span = p.number(*e, "doppler_span");
  if (auto e = take("errors", "range_span")) sc.error_model.range_span = p.number(*e, "range_span");

  // [equalizer]
  if (auto e = take("equalizer", "kinds")) {
    sc.equalizers.clear();
    for (const auto& s : p.list(*e)) sc.equalizers.push_back(parse_kind(s, e->line));
    if (sc.equalizers.empty()) throw ParseError(e->line, "kinds must list at least one equalizer");
  }
  if (auto e = take("equalizer", "weights")) {
    const std::string v = lower(e->value);
    if (v == "exact") sc.weights = WeightMode::Exact;
    else if (v == "neumann") sc.weights = WeightMode::Neumann;
    else throw ParseError(e->line, "weights must be exact|neumann");
  }
  if (auto e = take("equalizer", "neumann_order")) sc.approx.neumann_order = static_cast<int>(p.integer(*e, "neumann_order"));
  if (auto e = take("equalizer", "taylor_order")) sc.approx.taylor_order = static_cast<int>(p.integer(*e, "taylor_order"));
  if (auto e = take("equalizer", "diagonal")) {
    const std::string v = lower(e->value);
    if (v == "measured") sc.approx.diagonal = DiagonalMode::Measured;
    else if (v == "nominal") sc.approx.diagonal = DiagonalMode::Nominal;
    else throw ParseError(e->line, "diagonal must be measured|nominal");
  }
  if (auto e = take("equalizer", "symbol_power")) sc.approx.symbol_power = p.quantity(*e, "symbol_power", Dim::Power);

  // [sweep]
  if (auto e = take("sweep", "axis")) {
    const std::string v = lower(e->value);
    if (v == "none") f.sweep.axis = SweepAxis::None;
    else if (v == "snr") f.sweep.axis = SweepAxis::Snr;
    else if (v == "pilots") f.sweep.axis = SweepAxis::Pilots;
    else if (v == "drones") f.sweep.axis = SweepAxis::Drones;
    else if (v == "ratio") f.sweep.axis = SweepAxis::Ratio;
    else throw ParseError(e->line, "axis must be none|snr|pilots|drones|ratio");
  }
  if (auto e = take("sweep", "values")) {
    for (const auto& s : p.list(*e)) f.sweep.values.push_back(p.number(Entry{s, e->line}, "values"));
  }
  if (f.sweep.axis != SweepAxis::None && f.sweep.values.empty())
    throw ParseError(section_line.count("sweep") ? section_line["sweep"] : 0, "sweep axis needs 'values'");
  if (f.sweep.axis == SweepAxis::None && !f.sweep.values.empty())
    throw ParseError(section_line["sweep"], "'values' given without a sweep axis");
  if (auto e = take("sweep", "trials")) {
    const long long n = p.integer(*e, "trials");
    if (n < 1) throw ParseError(e->line, "trials must be >= 1");
    sc.n_trials = static_cast<std::size_t>(n);
  }
  if (auto e = take("sweep", "seed")) {
    const long long s = p.integer(*e, "seed");
    if (s < 0) throw ParseError(e->line, "seed must be >= 0");
    sc.seed = static_cast<std::uint64_t>(s);
  }

  // [output]
  if (auto e = take("output", "csv")) f.output.csv = e->value;
  if (auto e = take("output", "analytic")) f.output.analytic = p.boolean(*e, "analytic");
  if (auto e = take("output", "per_drone")) f.output.per_drone = p.boolean(*e, "per_drone");
  if (auto e = take("output", "range_nodes")) {
    const long long n = p.integer(*e, "range_nodes");
    if (n < 1 || n > 9) throw ParseError(e->line, "range_nodes must lie in 1..9");
    f.output.range_nodes = static_cast<int>(n);
  }

  for (const auto& [name, keys] : sections)
    if (!keys.empty()) {
      const auto& [key, entry] = *keys.begin();
      throw ParseError(entry.line, "unknown key '" + key + "' in [" + name + "]");
    }

  try {
    sc.validate();
    for (double v : f.sweep.values) apply_axis(sc, f.sweep.axis, v, 0).validate();
  } catch (const ParseError&) {
    throw;
  } catch (const DomainError& e) {
    throw ParseError(0, e.what());
  }
  return f;
}

std::string serialize_scenario(const ScenarioFile& f) {
  const Scenario& sc = f.scenario;
  std::ostringstream o;
  o << "[system]\n";
  o << "antennas = " << sc.system.n_antennas << "\n";
  o << "wavelength = " << fmt17(sc.system.wavelength) << " m\n";
  if (sc.system.element_spacing > 0.0) o << "element_spacing = " << fmt17(sc.system.element_spacing) << " m\n";
  o << "sample_rate = " << fmt17(sc.system.sample_rate) << " hz\n";
  if (sc.snr_db) o << "snr = " << fmt17(*sc.snr_db) << " db\n";
  else o << "noise_variance = " << fmt17(sc.system.noise_variance) << " w\n";
  for (std::size_t k = 0; k < sc.drones.size(); ++k) {
    const auto& d = sc.drones[k];
    o << "\n[drones." << k + 1 << "]\n";
    o << "doa = " << fmt17(d.doa) << " rad\n";
    o << "range = " << fmt17(d.range) << " m\n";
    o << "doppler = " << fmt17(d.doppler) << " hz\n";
    o << "power = " << fmt17(d.power) << " w\n";
    if (k < sc.error_model.sigmas.size()) {
      const auto& s = sc.error_model.sigmas[k];
      o << "sigma_doa = " << fmt17(s.doa) << " rad\n";
      o << "sigma_range = " << fmt17(s.range) << " m\n";
      o << "sigma_doppler = " << fmt17(s.doppler) << " hz\n";
    }
  }
  o << "\n[frame]\n";
  o << "pilots = " << sc.frame.n_subframes << "\n";
  o << "symbols = " << sc.frame.symbols_per_subframe << "\n";
  o << "modulation = " << sc.frame.modulation_order << "\n";
  o << "\n[errors]\n";
  o << "source = " << to_string(sc.error_source) << "\n";
  o << "calibration_trials = " << f.calibration_trials << "\n";
  o << "theta_bound = " << fmt17(sc.error_model.theta_bounds.hi) << " rad\n";
  o << "doppler_span = " << fmt17(sc.error_model.doppler_span) << "\n";
  o << "range_span = " << fmt17(sc.error_model.range_span) << "\n";
  o << "\n[equalizer]\n";
  o << "kinds = ";
  for (std::size_t i = 0; i < sc.equalizers.size(); ++i) o << (i ? ", " : "") << lower(std::string(to_string(sc.equalizers[i])));
  o << "\n";
  o << "weights = " << to_string(sc.weights) << "\n";
  o << "neumann_order = " << sc.approx.neumann_order << "\n";
  o << "taylor_order = " << sc.approx.taylor_order << "\n";
  o << "diagonal = " << to_string(sc.approx.diagonal) << "\n";
  if (sc.approx.symbol_power > 0.0) o << "symbol_power = " << fmt17(sc.approx.symbol_power) << " w\n";
  o << "\n[sweep]\n";
  o << "axis = " << to_string(f.sweep.axis) << "\n";
  if (!f.sweep.values.empty()) {
    o << "values = ";
    for (std::size_t i = 0; i < f.sweep.values.size(); ++i) o << (i ? ", " : "") << fmt17(f.sweep.values[i]);
    o << "\n";
  }
  o << "trials = " << sc.n_trials << "\n";
  o << "seed = " << sc.seed << "\n";
  o << "\n[output]\n";
  if (!f.output.csv.empty()) o << "csv = " << f.output.csv << "\n";
  o << "analytic = " << (f.output.analytic ? "true" : "false") << "\n";
  o << "per_drone = " << (f.output.per_drone ? "true" : "false") << "\n";
  o << "range_nodes = " << f.output.range_nodes << "\n";
  return o.str();
}

namespace {

std::string compact_exponent(const std::string& s) {
  const auto e = s.find('e');
  if (e == std::string::npos) return s;
  std::string mant = s.substr(0, e);
  if (mant.find('.') != std::string::npos) {
    while (!mant.empty() && mant.back() == '0') mant.pop_back();
    if (!mant.empty() && mant.back() == '.') mant.pop_back();
  }
  std::string ex = s.substr(e + 1);
  bool neg = false;
  if (!ex.empty() && (ex[0] == '+' || ex[0] == '-')) {
    neg = ex[0] == '-';
    ex = ex.substr(1);
  }
  while (ex.size() > 1 && ex[0] == '0') ex = ex.substr(1);
  return mant + "e" + (neg ? "-" : "") + ex;
}

}  // namespace

std::string format_value(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  if (std::abs(v) < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return compact_exponent(buf);
  }
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return compact_exponent(buf);
}

std::string format_table(const std::vector<ResultRow>& rows) {
  std::ostringstream o;
  o << kResultHeader << "\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_value(*v) : std::string(); };
  auto opti = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  for (const auto& r : rows) {
    o << opt(r.axis_value) << ',' << r.equalizer << ',' << r.drone << ',' << opt(r.ser) << ',' << opt(r.ci95) << ','
      << opt(r.rmse_theta) << ',' << opt(r.rmse_d) << ',' << opt(r.rmse_fd) << ',' << opt(r.analytic_ser) << ','
      << opti(r.neumann_order) << ',' << opti(r.taylor_order) << "\n";
  }
  return o.str();
}

void emit_table(const std::vector<ResultRow>& rows, const std::string& destination) {
  if (rows.empty()) throw DomainError("no result rows to write");
  const std::string text = format_table(rows);
  if (destination == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(destination, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + destination + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + destination + "'");
}

namespace {

template <class F>
auto with_context(const std::string& ctx, F&& fn) {
  try {
    return fn();
  } catch (const BudgetExceeded& e) {
    throw BudgetExceeded(ctx + ": " + e.what(), e.terms());
  } catch (const IllConditioned& e) {
    throw NumericalFailure(ctx + ": " + e.what());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(ctx + ": " + e.what());
  } catch (const Undefined& e) {
    throw Undefined(ctx + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(ctx + ": " + e.what());
  }
}

}  // namespace

RunReport execute_scenario(const ScenarioFile& file, const RunFlags& flags) {
  if (flags.analytic_only && flags.mc_only) throw DomainError("--analytic-only and --mc-only are mutually exclusive");
  Scenario base = file.scenario;
  if (flags.seed) base.seed = *flags.seed;
  base.jobs = std::max(flags.jobs, 1);
  base.validate();

  const bool want_mc = !flags.analytic_only;
  const bool want_analytic = !flags.mc_only && (file.output.analytic || flags.analytic_only);
  const bool sweeping = file.sweep.axis != SweepAxis::None;
  const std::vector<double> values = sweeping ? file.sweep.values : std::vector<double>{0.0};

  RunReport report;
  std::ostringstream sum;
  sum << "pascalsim run\n";
  sum << "drones " << base.drones.size() << ", antennas " << base.system.n_antennas << ", M = "
      << base.frame.modulation_order << ", pilots " << base.frame.n_subframes << ", symbols/trial "
      << base.frame.symbols_per_subframe << "\n";
  sum << "error source " << to_string(base.error_source) << ", weights " << to_string(base.weights)
      << ", trials " << base.n_trials << ", seed " << base.seed << "\n";
  sum << "SNR = P_1 eta_1^2 / sigma_n^2 per antenna (drone 1 reference)\n";
  sum << "analytic: Neumann order " << base.approx.neumann_order << ", Taylor order " << base.approx.taylor_order
      << ", diagonal " << to_string(base.approx.diagonal) << "\n";
  if (sweeping) sum << "axis " << to_string(file.sweep.axis) << "\n";

  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    Scenario sc = sweeping ? apply_axis(base, file.sweep.axis, v, i) : base;
    const std::string ctx = (sweeping ? "axis " + std::string(to_string(file.sweep.axis)) + " = " + format_value(v) : std::string("run")) +
                            ", seed " + std::to_string(sc.seed);
    with_context(ctx, [&] {
      if (sc.error_source == ErrorSource::SampledModel && file.calibration_trials > 0) {
        Scenario cal = sc;
        cal.error_source = ErrorSource::AoMl;
        cal.n_trials = file.calibration_trials;
        cal.seed = CounterRng(sc.seed).substream(0xca1).key();
        sc.error_model = calibrate_error_model(cal);
      }
      CampaignPoint cp;
      const bool need_run = want_mc || sc.error_source == ErrorSource::AoMl;
      if (need_run) cp = run_campaign_point(sc, {.simulate_data = want_mc, .keep_errors = false});

      const std::size_t kk = sc.drones.size();
      std::vector<std::vector<double>> analytic(sc.equalizers.size());
      if (want_analytic) {
        LocalizationErrorModel model = sc.error_model;
        if (sc.error_source == ErrorSource::AoMl) model.sigmas = *cp.rmse;
        for (std::size_t e = 0; e < sc.equalizers.size(); ++e)
          for (std::size_t k = 0; k < kk; ++k) {
            MomentContext mc;
            mc.system = sc.resolved_system();
            mc.drones = sc.drones;
            mc.errors = model;
            mc.modulation_order = sc.frame.modulation_order;
            mc.kind = sc.equalizers[e];
            mc.approx = sc.approx;
            mc.target = k;
            mc.range_nodes = file.output.range_nodes;
            analytic[e].push_back(average_ser(mc));
          }
      }

      for (std::size_t e = 0; e < sc.equalizers.size(); ++e) {
        auto make = [&](std::string drone) {
          ResultRow r;
          if (sweeping) r.axis_value = v;
          r.equalizer = std::string(to_string(sc.equalizers[e]));
          r.drone = std::move(drone);
          if (want_analytic || sc.weights == WeightMode::Neumann) {
            r.neumann_order = sc.approx.neumann_order;
          }
          if (want_analytic) r.taylor_order = sc.approx.taylor_order;
          return r;
        };
        if (file.output.per_drone) {
          for (std::size_t k = 0; k < kk; ++k) {
            ResultRow r = make(std::to_string(k + 1));
            if (want_mc) {
              r.ser = cp.ser[e].per_drone[k].ser;
              r.ci95 = cp.ser[e].per_drone[k].ci95;
            }
            if (cp.rmse) {
              r.rmse_theta = (*cp.rmse)[k].doa;
              r.rmse_d = (*cp.rmse)[k].range;
              r.rmse_fd = (*cp.rmse)[k].doppler;
            }
            if (want_analytic) r.analytic_ser = analytic[e][k];
            report.rows.push_back(std::move(r));
          }
        } else {
          ResultRow r = make("all");
          if (want_mc) {
            r.ser = cp.ser[e].ser;
            r.ci95 = cp.ser[e].ci95_halfwidth;
          }
          if (cp.rmse) {
            double a = 0, b = 0, c = 0;
            for (const auto& t : *cp.rmse) {
              a += t.doa;
              b += t.range;
              c += t.doppler;
            }
            r.rmse_theta = a / static_cast<double>(kk);
            r.rmse_d = b / static_cast<double>(kk);
            r.rmse_fd = c / static_cast<double>(kk);
          }
          if (want_analytic) {
            double a = 0;
            for (double x : analytic[e]) a += x;
            r.analytic_ser = a / static_cast<double>(kk);
          }
          report.rows.push_back(std::move(r));
        }
        sum << (sweeping ? format_value(v) + ": " : std::string()) << to_string(sc.equalizers[e]);
        if (want_mc) sum << " ser " << format_value(cp.ser[e].ser) << " +- " << format_value(cp.ser[e].ci95_halfwidth)
                         << " (" << cp.ser[e].errors << "/" << cp.ser[e].symbols << ")";
        if (want_analytic) {
          double a = 0;
          for (double x : analytic[e]) a += x;
          sum << " analytic " << format_value(a / static_cast<double>(kk));
        }
        sum << "\n";
      }
      if (cp.skipped_trials) sum << "  skipped ill-conditioned trials: " << cp.skipped_trials << "\n";
      return 0;
    });
  }
  report.summary = sum.str();
  return report;
}

int run_scenario(const std::string& path, const RunFlags& flags, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: cannot read scenario file '" << path << "'\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ScenarioFile file;
  try {
    file = parse_scenario(buf.str());
  } catch (const ParseError& e) {
    err << path << ": " << e.what() << "\n";
    return 2;
  }
  const std::string dest = !flags.out.empty() ? flags.out : (!file.output.csv.empty() ? file.output.csv : "-");
  try {
    const RunReport rep = execute_scenario(file, flags);
    emit_table(rep.rows, dest);
    if (dest == "-") {
      err << rep.summary;
    } else {
      std::ofstream s(dest + ".summary.txt", std::ios::binary);
      if (!s) throw std::runtime_error("cannot open '" + dest + ".summary.txt' for writing");
      s << rep.summary;
    }
  } catch (const BudgetExceeded& e) {
    err << path << ": numerical failure: " << e.what() << " (raise the term budget or lower orders)\n";
    return 3;
  } catch (const NumericalFailure& e) {
    err << path << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const Undefined& e) {
    err << path << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    err << path << ": invalid scenario: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << path << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace pascalsim
