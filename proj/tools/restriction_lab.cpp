#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rlab/runner.hpp"

namespace {

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("RESTRICTION_LAB_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end) throw rlab::manifest_error(std::string("RESTRICTION_LAB_SEED is not an integer: ") + s);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restriction-lab: numerical probes for Fourier restriction inequalities"};
  app.require_subcommand(1);

  std::string manifest_path, out_dir, formats;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool timing = false;

  auto* run = app.add_subcommand("run", "run every probe in a manifest");
  run->add_option("manifest", manifest_path, "JSON manifest")->required();
  run->add_option("--out", out_dir, "output directory (default: manifest output_dir)");
  run->add_option("--format", formats, "comma separated: csv,json");
  run->add_option("--jobs", jobs, "configs run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "overrides the manifest seed and RESTRICTION_LAB_SEED");
  run->add_flag("--timing", timing, "record wall time (outputs are then not reproducible)");

  auto* list = app.add_subcommand("list-probes", "list registered probes");
  auto* validate = app.add_subcommand("validate", "parse and validate a manifest");
  validate->add_option("manifest", manifest_path, "JSON manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (*list) {
    for (const auto& p : rlab::probe_catalog())
      std::printf("%-18s %-5s %s\n", p.name.c_str(), p.kind == rlab::ProbeKind::slope ? "slope" : "bound",
                  p.summary.c_str());
    return 0;
  }

  try {
    const auto override_seed = seed ? seed : env_seed();
    rlab::RunManifest m = rlab::load_manifest(manifest_path, override_seed);
    if (*validate) {
      std::printf("ok: %zu probe(s), seed %llu\n", m.probes.size(), (unsigned long long)m.seed);
      return 0;
    }
    if (!out_dir.empty()) m.output_dir = out_dir;
    if (!formats.empty()) {
      m.formats.clear();
      std::stringstream ss(formats);
      for (std::string f; std::getline(ss, f, ',');) {
        if (f != "csv" && f != "json") throw rlab::manifest_error("unknown format '" + f + "'");
        m.formats.push_back(f);
      }
    }
    std::filesystem::create_directories(m.output_dir);

    const auto reports = rlab::run_manifest(m, jobs, timing);
    for (const auto& r : reports) {
      const char* verdict = !r.error.empty() ? "ERROR" : r.pass ? "pass" : "FAIL";
      std::fprintf(stderr, "%-24s %-5s", r.id.c_str(), verdict);
      if (r.fit && r.target) std::fprintf(stderr, "  slope %.4f (target %.4f)", r.fit->exponent, *r.target);
      if (r.kind == rlab::ProbeKind::bound && r.error.empty()) std::fprintf(stderr, "  constant %.6g", r.constant);
      if (!r.error.empty()) std::fprintf(stderr, "  %s", r.error.c_str());
      std::fprintf(stderr, "\n");
    }
    const std::filesystem::path dir(m.output_dir);
    for (const auto& f : m.formats) {
      if (f == "csv") rlab::write_atomic((dir / "reports.csv").string(), rlab::format_csv(reports));
      if (f == "json") rlab::write_atomic((dir / "reports.json").string(), rlab::format_json(reports));
    }
    return rlab::exit_code(reports);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
