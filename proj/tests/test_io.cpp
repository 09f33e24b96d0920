#include <doctest.h>

#include <hdqkd/io.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace hdqkd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static std::mt19937_64 gen{std::random_device{}()};
  const fs::path p = fs::temp_directory_path() / ("hdqkd-test-" + std::to_string(gen()));
  fs::create_directories(p);
  return p;
}

io::json schema(const char* name) { return io::load_json_file(io::default_data_dir() / "schemas" / name); }

}  // namespace

TEST_CASE("bit packing is big endian within each byte") {
  CHECK(io::pack_bits({1, 0, 1}) == std::vector<std::uint8_t>{0xa0});
  CHECK(io::pack_bits({}) == std::vector<std::uint8_t>{});
  CHECK(io::pack_bits({1, 1, 1, 1, 0, 0, 0, 0, 1}) == std::vector<std::uint8_t>{0xf0, 0x80});

  const std::vector<std::uint8_t> bits = {0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1};
  const std::vector<std::uint8_t> back = io::unpack_bits(io::pack_bits(bits));
  CHECK(back == bits);

  CHECK(io::hex_string({0xde, 0xad}) == "dead");
  CHECK(io::hex_string({}) == "");
}

TEST_CASE("symbol labels keep both bits") {
  CHECK(io::bits_label(0) == "00");
  CHECK(io::bits_label(2) == "10");
  CHECK_THROWS_AS(io::bits_label(4), std::invalid_argument);
  for (std::uint8_t b = 0; b < 4; ++b) CHECK(io::parse_bits_label(io::bits_label(b)) == b);
  CHECK_THROWS(io::parse_bits_label("2"));
  CHECK_THROWS(io::parse_bits_label("012"));
  CHECK_THROWS(io::parse_bits_label("ab"));
}

TEST_CASE("text and binary files round-trip through a scratch directory") {
  const fs::path dir = temp_dir();
  const fs::path txt = dir / "note.txt";
  io::write_text_file(txt, "two\nlines\n");
  CHECK(io::read_text_file(txt) == "two\nlines\n");

  const std::vector<std::uint8_t> blob = {0x00, 0xff, 0x10, 0x0a, 0x0d};
  const fs::path bin = dir / "blob.bin";
  io::write_binary_file(bin, blob);
  CHECK(io::read_binary_file(bin) == blob);

  CHECK_THROWS_AS(io::read_text_file(dir / "absent.txt"), io::IoError);
  CHECK_THROWS_AS(io::write_text_file(dir / "no" / "such" / "dir.txt", "x"), io::IoError);

  io::write_text_file(dir / "broken.json", "{ not json");
  CHECK_THROWS_AS(io::load_json_file(dir / "broken.json"), io::IoError);
  fs::remove_all(dir);
}

TEST_CASE("the validator points at the failing path") {
  const io::json sch = io::json::parse(R"({
    "type": "object",
    "required": ["mode"],
    "additionalProperties": false,
    "properties": {
      "mode": {"type": "string", "enum": ["fast", "slow"]},
      "count": {"type": "integer", "minimum": 1, "maximum": 8},
      "tags": {"type": "array", "minItems": 1, "maxItems": 2, "items": {"type": "string"}},
      "ratio": {"type": ["number", "null"]}
    }
  })");

  io::validate_json(sch, io::json::parse(R"({"mode": "fast", "count": 3, "tags": ["x"], "ratio": null})"));
  io::validate_json(sch, io::json::parse(R"({"mode": "slow", "ratio": 0.5})"));

  const auto rejects = [&sch](const char* doc, const std::string& needle) {
    try {
      io::validate_json(sch, io::json::parse(doc));
      FAIL("expected a schema violation for ", doc);
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find("schema violation at ") == 0);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  rejects(R"({"count": 3})", "missing required key 'mode'");
  rejects(R"({"mode": "warp"})", "$.mode");
  rejects(R"({"mode": "fast", "count": 0})", "below minimum");
  rejects(R"({"mode": "fast", "count": 9})", "above maximum");
  rejects(R"({"mode": "fast", "count": 2.5})", "expected type");
  rejects(R"({"mode": "fast", "tags": []})", "at least");
  rejects(R"({"mode": "fast", "tags": ["a", "b", "c"]})", "at most");
  rejects(R"({"mode": "fast", "tags": [1]})", "$.tags[0]");
  rejects(R"({"mode": "fast", "extra": 1})", "unexpected key 'extra'");
  rejects(R"({"mode": "fast", "ratio": "half"})", "$.ratio");
}

TEST_CASE("the shipped presets load with sigmas scaled to radians") {
  const fs::path data = io::default_data_dir();

  const RunSettings ideal = io::load_preset("ideal", data);
  CHECK(ideal.name == "ideal");
  CHECK(ideal.subspace_l == 10);
  CHECK(ideal.source.kind == SourceKind::deterministic);
  CHECK(ideal.imperfections.waveplate_angle_sigma == 0.0);
  CHECK(ideal.imperfections.depolarizing_p == 0.0);
  CHECK(ideal.imperfections.misdetection_p == 0.0);

  const RunSettings l10 = io::load_preset("paper_l10", data);
  CHECK(l10.subspace_l == 10);
  CHECK(l10.source.kind == SourceKind::poisson);
  CHECK(l10.source.mean_photons == doctest::Approx(0.008));
  CHECK(l10.delta_pi == doctest::Approx(0.5));
  CHECK(l10.imperfections.waveplate_angle_sigma == doctest::Approx(0.003 * std::numbers::pi));
  CHECK(l10.imperfections.delta_phase_sigma == doctest::Approx(0.006 * std::numbers::pi));
  CHECK(l10.imperfections.pg_leakage == doctest::Approx(0.0005));
  CHECK(l10.imperfections.misdetection_p == doctest::Approx(0.002));
  CHECK(l10.imperfections.depolarizing_p > 0.0);
  CHECK(l10.imperfections.depolarizing_p < 0.2);

  const RunSettings l1 = io::load_preset("paper_l1", data);
  CHECK(l1.subspace_l == 1);
  CHECK(l1.imperfections.waveplate_angle_sigma == doctest::Approx(0.005 * std::numbers::pi));

  // A path works too, and unknown names fail as missing files.
  const RunSettings again = io::load_preset((data / "presets" / "ideal.json").string(), data);
  CHECK(again.name == "ideal");
  CHECK_THROWS_AS(io::load_preset("no_such_preset", data), io::IoError);
}

TEST_CASE("a preset that breaks its schema is rejected") {
  const fs::path dir = temp_dir();
  const fs::path bad = dir / "bad.json";
  io::write_text_file(bad, R"({"name": "bad", "subspace_l": 0,
    "source": {"kind": "deterministic"}, "imperfections": {}})");
  try {
    io::load_preset(bad.string(), io::default_data_dir());
    FAIL("expected a schema violation");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("$.subspace_l") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("the shipped recipe file reproduces the built-in table") {
  const fs::path data = io::default_data_dir();
  const RecipeTable loaded = io::load_recipe_table(data / "recipes_table.json", data);
  const RecipeTable builtin = default_recipe_table();
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(loaded[i].target.mub == builtin[i].target.mub);
    CHECK(loaded[i].target.bits == builtin[i].target.bits);
    REQUIRE(loaded[i].elements.size() == builtin[i].elements.size());
    for (std::size_t k = 0; k < loaded[i].elements.size(); ++k) {
      CHECK(loaded[i].elements[k].kind == builtin[i].elements[k].kind);
      CHECK(loaded[i].elements[k].angle_pi == doctest::Approx(builtin[i].elements[k].angle_pi));
    }
  }
}

TEST_CASE("the shipped port map reproduces the default wiring") {
  const fs::path data = io::default_data_dir();
  const PortMap loaded = io::load_port_map(data / "port_map.json", data);
  const PortMap builtin;
  for (MubBasis mub : {MubBasis::vector, MubBasis::scalar}) {
    for (std::uint8_t bits = 0; bits < 4; ++bits) {
      const DetectorPort port = builtin.port_for(mub, bits);
      CHECK(loaded.port_for(mub, bits) == port);
      CHECK(loaded.bits_for(port) == bits);
    }
  }
}

TEST_CASE("state dumps carry every component with its address") {
  RunSettings s;
  s.subspace_l = 1;
  const Bench bench = make_bench(s);
  const io::json doc = io::bench_modes_json(bench);
  io::validate_json(schema("state_dump.schema.json"), doc);

  const io::json& v00 = doc.at("v00");
  REQUIRE(v00.size() == 4);
  double norm = 0.0;
  for (const auto& row : v00) {
    const double re = row.at("re").get<double>();
    const double im = row.at("im").get<double>();
    norm += re * re + im * im;
  }
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("crosstalk serialises to csv, json and a heatmap") {
  RunSettings s;
  s.subspace_l = 1;
  const Bench bench = make_bench(s);
  const CrosstalkMatrix m = estimate_crosstalk(bench, 400, 3);

  const std::string csv = io::crosstalk_csv(m);
  CHECK(csv.find("prepared,v00,v01,v10,v11,s00,s01,s10,s11\n") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  const io::json doc = io::crosstalk_json(m);
  io::validate_json(schema("crosstalk.schema.json"), doc);
  CHECK(doc.at("subspace_l") == 1);
  CHECK(doc.at("trials_per_mode") == 400);
  CHECK(doc.at("fidelity").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(doc.at("p").size() == 8);
  CHECK(doc.at("p")[0].size() == 8);

  const std::string map = io::render_heatmap(m);
  CHECK(map.find("v00") != std::string::npos);
  CHECK(map.find("1.000") != std::string::npos);
}

TEST_CASE("the security report serialises and renders") {
  RunSettings s;
  s.subspace_l = 1;
  const Bench bench = make_bench(s);
  const SecurityReport r = build_report(estimate_crosstalk(bench, 400, 5));

  const io::json doc = io::security_report_json(r);
  io::validate_json(schema("security_report.schema.json"), doc);
  CHECK(doc.at("verdict") == "secure");
  CHECK(doc.at("measured").at("capacity_per_dimension").get<double>() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(doc.at("measured").contains("fidelity_se"));
  CHECK_FALSE(doc.at("ideal").contains("fidelity_se"));

  const std::string table = io::render_report_table(r);
  CHECK(table.find("key rate R") != std::string::npos);
  CHECK(table.find("verdict: secure") != std::string::npos);
}

TEST_CASE("transcript records and summaries validate against their schemas") {
  RunSettings s;
  s.subspace_l = 1;
  s.source.kind = SourceKind::poisson;
  s.source.mean_photons = 0.3;  // plenty of vacuum rows
  const Bench bench = make_bench(s);
  const Transcript t = run_bb84(300, DetectorScheme::filter, {}, bench, 17);

  const io::json record_schema = schema("transcript_record.schema.json");
  bool saw_null = false;
  for (const auto& sym : t.symbols) {
    const io::json rec = io::transcript_record_json(sym);
    io::validate_json(record_schema, rec);
    if (rec.at("bob_bits").is_null()) saw_null = true;
  }
  CHECK(saw_null);

  const std::string nd = io::transcript_ndjson(t);
  CHECK(std::count(nd.begin(), nd.end(), '\n') == 300);

  const SiftResult keys = sift(t);
  const io::json summary = io::bb84_summary_json(t, qber(keys.alice, keys.bob), keys.alice.bits.size());
  io::validate_json(schema("bb84_summary.schema.json"), summary);
  CHECK(summary.at("scheme") == "filter");
  CHECK(summary.at("symbols") == 300);

  const Transcript empty;
  const io::json empty_summary = io::bb84_summary_json(empty, 0.0, 0);
  io::validate_json(schema("bb84_summary.schema.json"), empty_summary);
  CHECK(empty_summary.at("sift_fraction_raw").is_null());
  CHECK(empty_summary.at("qber").is_null());
}

TEST_CASE("a vacuum transcript record keeps a null symbol") {
  ProtocolSymbol sym;
  sym.index = 7;
  sym.alice_bits = 3;
  const io::json rec = io::transcript_record_json(sym);
  CHECK(rec.at("index") == 7);
  CHECK(rec.at("alice_bits") == "11");
  CHECK(rec.at("bob_bits").is_null());
  CHECK(rec.at("clicked") == false);
}
