#include <CLI11.hpp>

#include <hdqkd/channel.hpp>
#include <hdqkd/io.hpp>
#include <hdqkd/optics.hpp>
#include <hdqkd/protocol.hpp>
#include <hdqkd/security.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

namespace {

using hdqkd::io::json;

struct Common {
  std::string preset = "ideal";
  int subspace_l = 0;  // 0 keeps the preset's value
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
  std::string data_dir;
  std::string config_file;
  std::string recipes_file;
  std::string port_map_file;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--preset", c.preset, "Preset name under <data>/presets, or a path to a preset file")
      ->envname("HDQKD_PRESET");
  cmd->add_option("--subspace-l", c.subspace_l, "Override the preset's OAM order l")
      ->envname("HDQKD_SUBSPACE_L")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Base seed for every random stream of the run")->envname("HDQKD_SEED");
  cmd->add_option("--threads", c.threads, "Worker threads; outputs do not depend on the count")
      ->envname("HDQKD_THREADS")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out_dir, "Directory for output files")->envname("HDQKD_OUT");
  cmd->add_option("--data-dir", c.data_dir, "Directory holding presets and schemas")->envname("HDQKD_DATA_DIR");
  cmd->add_option("--config", c.config_file, "JSON file supplying defaults for this subcommand's options")
      ->envname("HDQKD_CONFIG");
  cmd->add_option("--recipes", c.recipes_file, "Mode generation recipe table (JSON)")->envname("HDQKD_RECIPES");
  cmd->add_option("--port-map", c.port_map_file, "Detector wiring map (JSON)")->envname("HDQKD_PORT_MAP");
}

// Flags beat HDQKD_* variables beat the config file beat built-in defaults.
// CLI11 counts environment values as results, so count()==0 means the config
// file may fill the slot.
template <typename T>
void cfg_set(const CLI::App& cmd, const json& cfg, const std::string& flag, const std::string& key, T& target) {
  if (!cfg.contains(key)) return;
  const CLI::Option* opt = cmd.get_option_no_throw(flag);
  if (opt != nullptr && opt->count() > 0) return;
  target = cfg.at(key).get<T>();
}

json load_config(const Common& c, std::initializer_list<const char*> allowed) {
  if (c.config_file.empty()) return json::object();
  const json cfg = hdqkd::io::load_json_file(c.config_file);
  if (!cfg.is_object()) {
    throw hdqkd::io::IoError("'" + c.config_file + "' must hold a JSON object");
  }
  for (const auto& item : cfg.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&item](const char* name) { return item.key() == name; });
    if (!known) {
      throw std::runtime_error("config key '" + item.key() + "' is not an option of this subcommand");
    }
  }
  return cfg;
}

void merge_common(const CLI::App& cmd, const json& cfg, Common& c) {
  cfg_set(cmd, cfg, "--preset", "preset", c.preset);
  cfg_set(cmd, cfg, "--subspace-l", "subspace_l", c.subspace_l);
  cfg_set(cmd, cfg, "--seed", "seed", c.seed);
  cfg_set(cmd, cfg, "--threads", "threads", c.threads);
  cfg_set(cmd, cfg, "--out", "out", c.out_dir);
  cfg_set(cmd, cfg, "--data-dir", "data_dir", c.data_dir);
  cfg_set(cmd, cfg, "--recipes", "recipes", c.recipes_file);
  cfg_set(cmd, cfg, "--port-map", "port_map", c.port_map_file);
}

void require_seed(const CLI::App& cmd, const json& cfg) {
  const CLI::Option* opt = cmd.get_option_no_throw("--seed");
  if ((opt == nullptr || opt->count() == 0) && !cfg.contains("seed")) {
    throw std::runtime_error("--seed is required (flag, HDQKD_SEED, or config file)");
  }
}

std::filesystem::path resolve_data_dir(const Common& c) {
  return c.data_dir.empty() ? hdqkd::io::default_data_dir() : std::filesystem::path(c.data_dir);
}

hdqkd::Bench setup_bench(const Common& c) {
  const std::filesystem::path data_dir = resolve_data_dir(c);
  hdqkd::RunSettings settings = hdqkd::io::load_preset(c.preset, data_dir);
  if (c.subspace_l > 0) settings.subspace_l = c.subspace_l;
  const hdqkd::RecipeTable recipes = c.recipes_file.empty()
                                         ? hdqkd::default_recipe_table()
                                         : hdqkd::io::load_recipe_table(c.recipes_file, data_dir);
  const hdqkd::PortMap ports =
      c.port_map_file.empty() ? hdqkd::PortMap{} : hdqkd::io::load_port_map(c.port_map_file, data_dir);
  return hdqkd::make_bench(settings, recipes, ports);
}

void check_schema(const std::filesystem::path& data_dir, const char* name, const json& doc) {
  hdqkd::io::validate_json(hdqkd::io::load_json_file(data_dir / "schemas" / name), doc);
}

void write_json(const std::filesystem::path& file, const json& doc) {
  hdqkd::io::write_text_file(file, doc.dump(2) + "\n");
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

struct CrosstalkOpts {
  Common common;
  std::int64_t trials = 10000;
};

int run_crosstalk(const CLI::App& cmd, CrosstalkOpts& o) {
  const json cfg = load_config(o.common, {"preset", "subspace_l", "seed", "threads", "out", "data_dir", "recipes",
                                          "port_map", "trials"});
  merge_common(cmd, cfg, o.common);
  cfg_set(cmd, cfg, "--trials", "trials", o.trials);
  require_seed(cmd, cfg);

  const hdqkd::Bench bench = setup_bench(o.common);
  const hdqkd::CrosstalkMatrix m =
      hdqkd::estimate_crosstalk(bench, o.trials, o.common.seed, o.common.threads);

  const std::filesystem::path out(o.common.out_dir);
  std::filesystem::create_directories(out);
  hdqkd::io::write_text_file(out / "matrix.csv", hdqkd::io::crosstalk_csv(m));
  const json doc = hdqkd::io::crosstalk_json(m);
  check_schema(resolve_data_dir(o.common), "crosstalk.schema.json", doc);
  write_json(out / "crosstalk.json", doc);

  std::cout << "bench '" << bench.settings.name << "', l=" << bench.settings.subspace_l << ", " << o.trials
            << " trials per mode\n\n";
  std::cout << hdqkd::io::render_heatmap(m) << "\n";
  std::cout << "mean fidelity " << fmt("%.4f", doc.at("fidelity").get<double>()) << " +- "
            << fmt("%.4f", doc.at("fidelity_se").get<double>()) << "\n";
  std::cout << "wrote " << (out / "matrix.csv").string() << " and " << (out / "crosstalk.json").string() << "\n";
  return 0;
}

struct Bb84Opts {
  Common common;
  std::uint64_t n = 10000;
  std::string detector = "deterministic";
  std::string eve = "none";
  double eve_bias = 0.5;
  bool dump_state = false;
};

int run_bb84(const CLI::App& cmd, Bb84Opts& o) {
  const json cfg = load_config(o.common, {"preset", "subspace_l", "seed", "threads", "out", "data_dir", "recipes",
                                          "port_map", "n", "detector", "eve", "eve_bias", "dump_state"});
  merge_common(cmd, cfg, o.common);
  cfg_set(cmd, cfg, "--n", "n", o.n);
  cfg_set(cmd, cfg, "--detector", "detector", o.detector);
  cfg_set(cmd, cfg, "--eve", "eve", o.eve);
  cfg_set(cmd, cfg, "--eve-bias", "eve_bias", o.eve_bias);
  cfg_set(cmd, cfg, "--dump-state", "dump_state", o.dump_state);
  require_seed(cmd, cfg);

  const hdqkd::DetectorScheme scheme = hdqkd::parse_detector_scheme(o.detector);
  const hdqkd::EveStrategy eve{hdqkd::parse_eve_kind(o.eve), o.eve_bias};
  const hdqkd::Bench bench = setup_bench(o.common);
  const hdqkd::Transcript t = hdqkd::run_bb84(o.n, scheme, eve, bench, o.common.seed, o.common.threads);
  const hdqkd::SiftResult keys = hdqkd::sift(t);
  const double q = hdqkd::qber(keys.alice, keys.bob);

  const std::filesystem::path out(o.common.out_dir);
  const std::filesystem::path data_dir = resolve_data_dir(o.common);
  std::filesystem::create_directories(out);
  hdqkd::io::write_text_file(out / "transcript.ndjson", hdqkd::io::transcript_ndjson(t));
  const std::vector<std::uint8_t> key_bytes = hdqkd::io::pack_bits(keys.alice.bits);
  hdqkd::io::write_binary_file(out / "key.bin", key_bytes);
  hdqkd::io::write_text_file(out / "key.hex", hdqkd::io::hex_string(key_bytes) + "\n");
  const json summary = hdqkd::io::bb84_summary_json(t, q, keys.alice.bits.size());
  check_schema(data_dir, "bb84_summary.schema.json", summary);
  write_json(out / "summary.json", summary);
  if (o.dump_state) {
    const json states = hdqkd::io::bench_modes_json(bench);
    check_schema(data_dir, "state_dump.schema.json", states);
    write_json(out / "states.json", states);
  }

  const hdqkd::TranscriptStats stats = hdqkd::tally(t);
  std::cout << "bench '" << bench.settings.name << "', " << hdqkd::to_string(scheme) << " detection, eve "
            << hdqkd::to_string(eve.kind) << "\n";
  std::cout << "  symbols " << stats.symbols << ", clicked " << stats.clicked << ", sifted " << stats.sifted
            << "\n";
  if (stats.sifted > 0) {
    std::cout << "  sift fraction " << fmt("%.4f", summary.at("sift_fraction_raw").get<double>()) << " raw, "
              << fmt("%.4f", summary.at("sift_fraction_detected").get<double>()) << " of detections\n";
    std::cout << "  qber " << fmt("%.4f", q) << ", key bits " << keys.alice.bits.size() << "\n";
  } else {
    std::cout << "  nothing sifted\n";
  }
  std::cout << "wrote " << (out / "summary.json").string() << "\n";
  return 0;
}

struct SecurityOpts {
  Common common;
  std::int64_t trials = 10000;
  std::string info_variant = "spread-all";
};

int run_security(const CLI::App& cmd, SecurityOpts& o) {
  const json cfg = load_config(o.common, {"preset", "subspace_l", "seed", "threads", "out", "data_dir", "recipes",
                                          "port_map", "trials", "info_variant"});
  merge_common(cmd, cfg, o.common);
  cfg_set(cmd, cfg, "--trials", "trials", o.trials);
  cfg_set(cmd, cfg, "--info-variant", "info_variant", o.info_variant);
  require_seed(cmd, cfg);

  const hdqkd::InfoVariant variant = hdqkd::parse_info_variant(o.info_variant);
  const hdqkd::Bench bench = setup_bench(o.common);
  const hdqkd::CrosstalkMatrix m =
      hdqkd::estimate_crosstalk(bench, o.trials, o.common.seed, o.common.threads);
  const hdqkd::SecurityReport report = hdqkd::build_report(m, variant);

  const std::filesystem::path out(o.common.out_dir);
  std::filesystem::create_directories(out);
  const json doc = hdqkd::io::security_report_json(report);
  check_schema(resolve_data_dir(o.common), "security_report.schema.json", doc);
  write_json(out / "report.json", doc);

  std::cout << "bench '" << bench.settings.name << "', l=" << bench.settings.subspace_l << ", " << o.trials
            << " trials per mode, " << hdqkd::to_string(variant) << "\n\n";
  std::cout << hdqkd::io::render_report_table(report);
  std::cout << "wrote " << (out / "report.json").string() << "\n";
  return 0;
}

struct OtpOpts {
  std::string key_file;
  std::string in_file;
  std::string out_file;
};

int run_otp(const OtpOpts& o) {
  const std::vector<std::uint8_t> key_bytes = hdqkd::io::read_binary_file(o.key_file);
  if (key_bytes.empty()) {
    std::cerr << "error: one-time pad key '" << o.key_file << "' is empty\n";
    return 3;
  }
  const std::vector<std::uint8_t> payload = hdqkd::io::read_binary_file(o.in_file);
  const hdqkd::OtpResult result = hdqkd::otp_apply(payload, hdqkd::io::unpack_bits(key_bytes));
  hdqkd::io::write_binary_file(o.out_file, result.data);
  if (result.key_repeated) {
    std::cerr << "warning: payload is longer than the key, the pad repeats\n";
  }
  std::cout << "wrote " << o.out_file << " (" << result.data.size() << " bytes)\n";
  return 0;
}

struct CompareOpts {
  Common common;
  std::uint64_t n = 10000;
};

int run_compare(const CLI::App& cmd, CompareOpts& o) {
  const json cfg = load_config(o.common, {"preset", "subspace_l", "seed", "threads", "out", "data_dir", "recipes",
                                          "port_map", "n"});
  merge_common(cmd, cfg, o.common);
  cfg_set(cmd, cfg, "--n", "n", o.n);
  require_seed(cmd, cfg);

  const hdqkd::Bench bench = setup_bench(o.common);
  const hdqkd::EveStrategy no_eve{};
  json per_scheme[2];
  double raw_fraction[2] = {0.0, 0.0};
  const hdqkd::DetectorScheme schemes[2] = {hdqkd::DetectorScheme::deterministic, hdqkd::DetectorScheme::filter};
  for (int i = 0; i < 2; ++i) {
    const hdqkd::Transcript t = hdqkd::run_bb84(o.n, schemes[i], no_eve, bench, o.common.seed, o.common.threads);
    const hdqkd::SiftResult keys = hdqkd::sift(t);
    per_scheme[i] = hdqkd::io::bb84_summary_json(t, hdqkd::qber(keys.alice, keys.bob), keys.alice.bits.size());
    const hdqkd::TranscriptStats stats = hdqkd::tally(t);
    raw_fraction[i] =
        stats.symbols > 0 ? static_cast<double>(stats.sifted) / static_cast<double>(stats.symbols) : 0.0;
  }

  json doc;
  doc["deterministic"] = per_scheme[0];
  doc["filter"] = per_scheme[1];
  doc["sift_rate_ratio"] = raw_fraction[1] > 0.0 ? json(raw_fraction[0] / raw_fraction[1]) : json(nullptr);

  const std::filesystem::path out(o.common.out_dir);
  std::filesystem::create_directories(out);
  check_schema(resolve_data_dir(o.common), "compare.schema.json", doc);
  write_json(out / "compare.json", doc);

  std::cout << "bench '" << bench.settings.name << "', " << o.n << " symbols per scheme\n";
  std::cout << "  deterministic sift fraction " << fmt("%.4f", raw_fraction[0]) << "\n";
  std::cout << "  filter        sift fraction " << fmt("%.4f", raw_fraction[1]) << "\n";
  if (raw_fraction[1] > 0.0) {
    std::cout << "  ratio " << fmt("%.3f", raw_fraction[0] / raw_fraction[1]) << "\n";
  }
  std::cout << "wrote " << (out / "compare.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabletop model of a four-dimensional BB84 link over vector vortex modes"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* crosstalk_cmd = app.add_subcommand("crosstalk", "Estimate the 8x8 mode crosstalk matrix");
  auto crosstalk_opts = std::make_shared<CrosstalkOpts>();
  add_common(crosstalk_cmd, crosstalk_opts->common);
  crosstalk_cmd->add_option("--trials", crosstalk_opts->trials, "Monte Carlo trials per prepared mode")
      ->envname("HDQKD_TRIALS")
      ->check(CLI::PositiveNumber);
  crosstalk_cmd->callback(
      [crosstalk_cmd, crosstalk_opts, &action] { action = [=] { return run_crosstalk(*crosstalk_cmd, *crosstalk_opts); }; });

  auto* bb84_cmd = app.add_subcommand("bb84", "Run the prepare-and-measure protocol and sift a key");
  auto bb84_opts = std::make_shared<Bb84Opts>();
  add_common(bb84_cmd, bb84_opts->common);
  bb84_cmd->add_option("--n", bb84_opts->n, "Number of symbols Alice sends")
      ->envname("HDQKD_N")
      ->check(CLI::PositiveNumber);
  bb84_cmd->add_option("--detector", bb84_opts->detector, "Receiver scheme: deterministic or filter")
      ->envname("HDQKD_DETECTOR");
  bb84_cmd->add_option("--eve", bb84_opts->eve, "Eavesdropper: none or intercept-resend")->envname("HDQKD_EVE");
  bb84_cmd->add_option("--eve-bias", bb84_opts->eve_bias, "Probability Eve picks the vector analyser")
      ->envname("HDQKD_EVE_BIAS")
      ->check(CLI::Range(0.0, 1.0));
  bb84_cmd->add_flag("--dump-state", bb84_opts->dump_state, "Also write the eight prepared states as JSON");
  bb84_cmd->callback([bb84_cmd, bb84_opts, &action] { action = [=] { return run_bb84(*bb84_cmd, *bb84_opts); }; });

  auto* security_cmd = app.add_subcommand("security", "Crosstalk run plus the one-way security analysis");
  auto security_opts = std::make_shared<SecurityOpts>();
  add_common(security_cmd, security_opts->common);
  security_cmd->add_option("--trials", security_opts->trials, "Monte Carlo trials per prepared mode")
      ->envname("HDQKD_TRIALS")
      ->check(CLI::PositiveNumber);
  security_cmd->add_option("--info-variant", security_opts->info_variant,
                           "Error spreading in I(A;B): spread-all or spread-others")
      ->envname("HDQKD_INFO_VARIANT");
  security_cmd->callback(
      [security_cmd, security_opts, &action] { action = [=] { return run_security(*security_cmd, *security_opts); }; });

  auto* otp_cmd = app.add_subcommand("otp", "XOR a file with a sifted key file");
  auto otp_opts = std::make_shared<OtpOpts>();
  otp_cmd->add_option("--key", otp_opts->key_file, "Key file, for instance key.bin from a bb84 run")->required();
  otp_cmd->add_option("--in", otp_opts->in_file, "Input file")->required();
  otp_cmd->add_option("--out", otp_opts->out_file, "Output file")->required();
  otp_cmd->callback([otp_opts, &action] { action = [=] { return run_otp(*otp_opts); }; });

  auto* compare_cmd = app.add_subcommand("compare-detectors", "Same run under both receiver schemes");
  auto compare_opts = std::make_shared<CompareOpts>();
  add_common(compare_cmd, compare_opts->common);
  compare_cmd->add_option("--n", compare_opts->n, "Number of symbols Alice sends")
      ->envname("HDQKD_N")
      ->check(CLI::PositiveNumber);
  compare_cmd->callback(
      [compare_cmd, compare_opts, &action] { action = [=] { return run_compare(*compare_cmd, *compare_opts); }; });

  CLI11_PARSE(app, argc, argv);

  try {
    return action();
  } catch (const hdqkd::io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
