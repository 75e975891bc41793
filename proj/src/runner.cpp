#include "rlab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace rlab {

using nlohmann::json;

namespace {

const char* kind_name(ProbeKind k) { return k == ProbeKind::slope ? "slope" : "bound"; }

ProbeKind kind_from(const std::string& s) {
  if (s == "slope") return ProbeKind::slope;
  if (s == "bound") return ProbeKind::bound;
  throw std::runtime_error("unknown probe kind '" + s + "'");
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Non-finite values are not JSON numbers; they go out as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double get_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw std::runtime_error("bad number '" + s + "'");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

const std::set<std::string> kEntryKeys{"id", "probe", "surface", "variant", "dim", "p", "q", "p_prime", "q_prime",
                                       "scales", "trials", "seed", "slope_tol", "defect_tol", "params"};

ProbeConfig parse_entry(const json& e, std::uint64_t seed) {
  if (!e.is_object()) throw manifest_error("probe entry must be an object");
  for (auto it = e.begin(); it != e.end(); ++it)
    if (!kEntryKeys.count(it.key())) throw manifest_error("unknown key '" + it.key() + "'");
  std::string probe = e.value("probe", std::string());
  if (probe.empty()) probe = e.value("id", std::string());
  if (probe.empty()) throw manifest_error("entry names no probe");
  if (!is_probe(probe)) throw manifest_error("unknown probe id '" + probe + "'");
  ProbeConfig c = default_config(probe);
  c.id = e.value("id", probe);
  c.seed = seed;
  if (e.contains("surface")) c.surface = e["surface"].get<std::string>();
  if (e.contains("variant")) c.variant = e["variant"].get<std::string>();
  if (e.contains("dim")) c.dim = e["dim"].get<int>();
  if (e.contains("p")) c.p = e["p"].get<double>();
  if (e.contains("q")) c.q = e["q"].get<double>();
  if (e.contains("p_prime")) c.p_prime = e["p_prime"].get<double>();
  if (e.contains("q_prime")) c.q_prime = e["q_prime"].get<double>();
  if (e.contains("scales")) c.scales = e["scales"].get<std::vector<double>>();
  if (e.contains("trials")) c.trials = e["trials"].get<int>();
  if (e.contains("seed")) c.seed = e["seed"].get<std::uint64_t>();
  if (e.contains("slope_tol")) c.slope_tol = e["slope_tol"].get<double>();
  if (e.contains("defect_tol")) c.defect_tol = e["defect_tol"].get<double>();
  if (e.contains("params"))
    for (auto it = e["params"].begin(); it != e["params"].end(); ++it) c.params[it.key()] = it.value().get<double>();
  validate_config(c);
  return c;
}

json report_json(const ProbeReport& r) {
  json j;
  j["id"] = r.id;
  j["probe"] = r.probe;
  j["kind"] = kind_name(r.kind);
  j["seed"] = r.seed;
  j["rows"] = json::array();
  for (const auto& row : r.rows) j["rows"].push_back({{"scale", num(row.scale)}, {"measured", num(row.measured)}, {"skipped", row.skipped}});
  if (r.fit)
    j["fit"] = {{"exponent", num(r.fit->exponent)},
                {"intercept", num(r.fit->intercept)},
                {"residual", num(r.fit->residual)},
                {"point_count", r.fit->point_count}};
  else
    j["fit"] = nullptr;
  j["target"] = r.target ? num(*r.target) : json(nullptr);
  j["one_sided"] = r.one_sided;
  j["target_note"] = r.target_note;
  j["slope_tol"] = num(r.slope_tol);
  j["defect_tol"] = num(r.defect_tol);
  j["constant"] = num(r.constant);
  j["bound"] = num(r.bound);
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name}, {"value", num(c.value)}, {"limit", num(c.limit)}, {"pass", c.pass}});
  j["metrics"] = json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = num(v);
  j["trials"] = json::array();
  for (const auto& t : r.trials)
    j["trials"].push_back({{"scale", num(t.scale)}, {"trial", t.trial}, {"value", num(t.value)}, {"status", t.status}});
  j["rejected"] = r.rejected;
  j["verdict"] = r.error.empty() ? (r.pass ? "pass" : "fail") : "error";
  j["pass"] = r.pass;
  j["error"] = r.error;
  j["runtime_ms"] = num(r.runtime_ms);
  return j;
}

ProbeReport report_from(const json& j) {
  ProbeReport r;
  r.id = j.at("id").get<std::string>();
  r.probe = j.at("probe").get<std::string>();
  r.kind = kind_from(j.at("kind").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& row : j.at("rows"))
    r.rows.push_back({get_num(row.at("scale")), get_num(row.at("measured")), row.at("skipped").get<bool>()});
  if (!j.at("fit").is_null()) {
    const auto& f = j["fit"];
    SlopeFit fit;
    fit.exponent = get_num(f.at("exponent"));
    fit.intercept = get_num(f.at("intercept"));
    fit.residual = get_num(f.at("residual"));
    fit.point_count = f.at("point_count").get<decltype(fit.point_count)>();
    r.fit = fit;
  }
  if (!j.at("target").is_null()) r.target = get_num(j["target"]);
  r.one_sided = j.at("one_sided").get<bool>();
  r.target_note = j.at("target_note").get<std::string>();
  r.slope_tol = get_num(j.at("slope_tol"));
  r.defect_tol = get_num(j.at("defect_tol"));
  r.constant = get_num(j.at("constant"));
  r.bound = get_num(j.at("bound"));
  for (const auto& c : j.at("checks"))
    r.checks.push_back({c.at("name").get<std::string>(), get_num(c.at("value")), get_num(c.at("limit")), c.at("pass").get<bool>()});
  for (auto it = j.at("metrics").begin(); it != j["metrics"].end(); ++it) r.metrics[it.key()] = get_num(it.value());
  for (const auto& t : j.at("trials"))
    r.trials.push_back({get_num(t.at("scale")), t.at("trial").get<int>(), get_num(t.at("value")), t.at("status").get<std::string>()});
  r.rejected = j.at("rejected").get<int>();
  r.pass = j.at("pass").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.runtime_ms = get_num(j.at("runtime_ms"));
  return r;
}

}  // namespace

RunManifest parse_manifest(const std::string& text, std::optional<std::uint64_t> seed_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw manifest_error("manifest parse error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!j.is_object()) throw manifest_error("manifest must be a JSON object");
  RunManifest m;
  try {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (it.key() != "seed" && it.key() != "output_dir" && it.key() != "formats" && it.key() != "probes")
        throw manifest_error("unknown top-level key '" + it.key() + "'");
    if (j.contains("seed")) m.seed = j["seed"].get<std::uint64_t>();
    if (seed_override) m.seed = *seed_override;
    if (j.contains("output_dir")) m.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("formats")) m.formats = j["formats"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw manifest_error(std::string("manifest: ") + e.what());
  }
  for (const auto& f : m.formats)
    if (f != "csv" && f != "json") throw manifest_error("unknown format '" + f + "'");
  std::set<std::string> ids;
  if (j.contains("probes")) {
    if (!j["probes"].is_array()) throw manifest_error("'probes' must be an array");
    std::size_t k = 0;
    for (const auto& e : j["probes"]) {
      try {
        ProbeConfig c = parse_entry(e, m.seed);
        if (!ids.insert(c.id).second) throw manifest_error("duplicate probe id '" + c.id + "'");
        m.probes.push_back(std::move(c));
      } catch (const std::exception& ex) {
        throw manifest_error("probes[" + std::to_string(k) + "]: " + ex.what());
      }
      ++k;
    }
  }
  return m;
}

RunManifest load_manifest(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw manifest_error("cannot read manifest '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), seed_override);
}

std::vector<ProbeReport> run_manifest(const RunManifest& m, int jobs, bool record_time) {
  std::vector<ProbeReport> out(m.probes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < out.size();) out[k] = run_probe(m.probes[k], record_time);
  };
  const int n = std::max(1, std::min<int>(jobs, int(out.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

int exit_code(const std::vector<ProbeReport>& reports) {
  bool fail = false;
  for (const auto& r : reports) {
    if (!r.error.empty()) return 2;
    fail = fail || !r.pass;
  }
  return fail ? 1 : 0;
}

std::string format_csv(const std::vector<ProbeReport>& reports) {
  std::string out = "probe_id,scale,measured,target_exponent,fitted_exponent,residual,constant,verdict,seed,runtime_ms\n";
  for (const auto& r : reports) {
    const std::string verdict = r.error.empty() ? (r.pass ? "pass" : "fail") : "error";
    const std::string target = r.target ? fmt17(*r.target) : "";
    const std::string fitted = r.fit ? fmt17(r.fit->exponent) : "";
    const std::string residual = r.fit ? fmt17(r.fit->residual) : "";
    auto line = [&](const std::string& scale, const std::string& measured) {
      out += csv_field(r.id) + ',' + scale + ',' + measured + ',' + target + ',' + fitted + ',' + residual + ',' +
             fmt17(r.constant) + ',' + verdict + ',' + std::to_string(r.seed) + ',' + fmt17(r.runtime_ms) + '\n';
    };
    if (r.rows.empty()) line("", "");
    for (const auto& row : r.rows) line(fmt17(row.scale), row.skipped ? "" : fmt17(row.measured));
  }
  return out;
}

std::string format_json(const std::vector<ProbeReport>& reports) {
  json j = json::object();
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(report_json(r));
  return j.dump(2) + "\n";
}

std::vector<ProbeReport> parse_reports_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<ProbeReport> out;
  for (const auto& r : j.at("reports")) out.push_back(report_from(r));
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace rlab
