#include <hdqkd/io.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

namespace hdqkd::io {

std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + p.string() + "' for reading");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw IoError("failed while reading '" + p.string() + "'");
  }
  return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + p.string() + "' for writing");
  }
  out << content;
  out.flush();
  if (!out.good()) {
    throw IoError("failed while writing '" + p.string() + "'");
  }
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& p) {
  const std::string text = read_text_file(p);
  return {text.begin(), text.end()};
}

void write_binary_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  write_text_file(p, std::string(bytes.begin(), bytes.end()));
}

json load_json_file(const std::filesystem::path& p) {
  const std::string text = read_text_file(p);
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + p.string() + "' is not valid JSON: " + e.what());
  }
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("HDQKD_DATA_DIR")) {
    return env;
  }
  return HDQKD_DATA_DIR;
}

namespace {

std::string type_name(const json& v) {
  if (v.is_object()) return "object";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_null()) return "null";
  return "unknown";
}

bool matches_type(const std::string& t, const json& v) {
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "null") return v.is_null();
  throw std::runtime_error("schema names unsupported type '" + t + "'");
}

}  // namespace

void validate_json(const json& schema, const json& value, const std::string& where) {
  const auto fail = [&where](const std::string& msg) {
    throw std::runtime_error("schema violation at " + where + ": " + msg);
  };
  if (schema.contains("type")) {
    const json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(t.get<std::string>(), value);
    } else {
      for (const auto& cand : t) {
        if (matches_type(cand.get<std::string>(), value)) {
          ok = true;
          break;
        }
      }
    }
    if (!ok) fail("expected type " + t.dump() + ", got " + type_name(value));
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& cand : schema.at("enum")) {
      if (cand == value) {
        ok = true;
        break;
      }
    }
    if (!ok) fail("value " + value.dump() + " is not one of " + schema.at("enum").dump());
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema.at("required")) {
        if (!value.contains(key.get<std::string>())) {
          fail("missing required key '" + key.get<std::string>() + "'");
        }
      }
    }
    const json* props = schema.contains("properties") ? &schema.at("properties") : nullptr;
    if (props) {
      for (auto it = props->begin(); it != props->end(); ++it) {
        if (value.contains(it.key())) {
          validate_json(it.value(), value.at(it.key()), where + "." + it.key());
        }
      }
    }
    if (schema.contains("additionalProperties") && schema.at("additionalProperties").is_boolean() &&
        !schema.at("additionalProperties").get<bool>()) {
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!props || !props->contains(it.key())) {
          fail("unexpected key '" + it.key() + "'");
        }
      }
    }
  }
  if (value.is_array()) {
    if (schema.contains("minItems") && value.size() < schema.at("minItems").get<std::size_t>()) {
      fail("array has " + std::to_string(value.size()) + " items, needs at least " +
           schema.at("minItems").dump());
    }
    if (schema.contains("maxItems") && value.size() > schema.at("maxItems").get<std::size_t>()) {
      fail("array has " + std::to_string(value.size()) + " items, allows at most " +
           schema.at("maxItems").dump());
    }
    if (schema.contains("items")) {
      std::size_t i = 0;
      for (const auto& el : value) {
        validate_json(schema.at("items"), el, where + "[" + std::to_string(i) + "]");
        ++i;
      }
    }
  }
  if (value.is_number()) {
    if (schema.contains("minimum") && value.get<double>() < schema.at("minimum").get<double>()) {
      fail("value " + value.dump() + " is below minimum " + schema.at("minimum").dump());
    }
    if (schema.contains("maximum") && value.get<double>() > schema.at("maximum").get<double>()) {
      fail("value " + value.dump() + " is above maximum " + schema.at("maximum").dump());
    }
  }
}

namespace {

json load_schema(const std::filesystem::path& data_dir, const char* name) {
  return load_json_file(data_dir / "schemas" / name);
}

Path parse_path_letter(const std::string& s) {
  if (s == "a") return Path::a;
  if (s == "b") return Path::b;
  if (s == "c") return Path::c;
  if (s == "d") return Path::d;
  throw std::runtime_error("unknown path '" + s + "'");
}

MubBasis parse_mub(const std::string& s) {
  if (s == "vector") return MubBasis::vector;
  if (s == "scalar") return MubBasis::scalar;
  throw std::runtime_error("unknown analyser '" + s + "'");
}

// Deterministic float formatting for CSV cells.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

RecipeTable load_recipe_table(const std::filesystem::path& file, const std::filesystem::path& data_dir) {
  const json doc = load_json_file(file);
  validate_json(load_schema(data_dir, "recipes.schema.json"), doc);
  RecipeTable table;
  std::array<bool, 8> seen{};
  for (const auto& row : doc.at("recipes")) {
    GenerationRecipe recipe;
    recipe.target = parse_mode_label(row.at("target").get<std::string>());
    for (const auto& el : row.at("elements")) {
      RecipeElement elem;
      const std::string kind = el.at("kind").get<std::string>();
      if (kind == "quarter_wave") {
        elem.kind = RecipeElementKind::quarter_wave;
      } else if (kind == "half_wave") {
        elem.kind = RecipeElementKind::half_wave;
      } else {
        elem.kind = RecipeElementKind::q_plate;
      }
      elem.angle_pi = el.value("angle_pi", 0.0);
      recipe.elements.push_back(elem);
    }
    const int idx = codebook_index(recipe.target);
    if (seen[static_cast<std::size_t>(idx)]) {
      throw IoError("'" + file.string() + "' lists " + mode_label(recipe.target) + " twice");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    table[static_cast<std::size_t>(idx)] = std::move(recipe);
  }
  return table;
}

PortMap load_port_map(const std::filesystem::path& file, const std::filesystem::path& data_dir) {
  const json doc = load_json_file(file);
  validate_json(load_schema(data_dir, "port_map.schema.json"), doc);
  std::vector<PortMap::Entry> entries;
  for (const auto& row : doc.at("ports")) {
    PortMap::Entry e;
    e.port.analyser = parse_mub(row.at("analyser").get<std::string>());
    e.port.path = parse_path_letter(row.at("path").get<std::string>());
    e.port.oam_bin = row.at("oam_bin").get<int>();
    e.bits = parse_bits_label(row.at("bits").get<std::string>());
    entries.push_back(e);
  }
  return PortMap(entries);
}

RunSettings load_preset(const std::string& name_or_path, const std::filesystem::path& data_dir) {
  std::filesystem::path file(name_or_path);
  if (!std::filesystem::exists(file) && file.extension() != ".json") {
    file = data_dir / "presets" / (name_or_path + ".json");
  }
  const json doc = load_json_file(file);
  validate_json(load_schema(data_dir, "preset.schema.json"), doc);

  constexpr double pi = std::numbers::pi;
  RunSettings s;
  s.name = doc.at("name").get<std::string>();
  s.subspace_l = doc.at("subspace_l").get<int>();
  s.delta_pi = doc.value("delta_pi", 0.5);
  const json& src = doc.at("source");
  s.source.kind = src.at("kind").get<std::string>() == "poisson" ? SourceKind::poisson : SourceKind::deterministic;
  s.source.mean_photons = src.value("mean_photons", 0.008);
  const json& imp = doc.at("imperfections");
  s.imperfections.waveplate_angle_sigma = imp.value("waveplate_angle_sigma_pi", 0.0) * pi;
  s.imperfections.delta_phase_sigma = imp.value("delta_phase_sigma_pi", 0.0) * pi;
  s.imperfections.pg_leakage = imp.value("pg_leakage", 0.0);
  s.imperfections.depolarizing_p = imp.value("depolarizing_p", 0.0);
  s.imperfections.misdetection_p = imp.value("misdetection_p", 0.0);
  return s;
}

std::string bits_label(std::uint8_t bits) {
  if (bits > 3) {
    throw std::invalid_argument("symbol " + std::to_string(bits) + " is out of range 0..3");
  }
  return {static_cast<char>('0' + ((bits >> 1) & 1)), static_cast<char>('0' + (bits & 1))};
}

std::uint8_t parse_bits_label(const std::string& label) {
  if (label.size() != 2 || (label[0] != '0' && label[0] != '1') || (label[1] != '0' && label[1] != '1')) {
    throw std::runtime_error("bad symbol '" + label + "', expected 00..11");
  }
  return static_cast<std::uint8_t>(((label[0] - '0') << 1) | (label[1] - '0'));
}

json state_json(const StateXd& s) {
  json arr = json::array();
  for (int i = 0; i < s.basis.dim(); ++i) {
    const BasisIndex& e = s.basis.entry(i);
    json row;
    row["pol"] = to_string(e.pol);
    row["oam"] = e.oam;
    row["path"] = to_string(e.path);
    row["re"] = s.amps[i].real();
    row["im"] = s.amps[i].imag();
    arr.push_back(std::move(row));
  }
  return arr;
}

json bench_modes_json(const Bench& bench) {
  json out;
  for (int i = 0; i < 8; ++i) {
    out[mode_label(mode_from_index(i))] = state_json(bench.modes[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string crosstalk_csv(const CrosstalkMatrix& m) {
  std::string out = "prepared";
  for (int j = 0; j < 8; ++j) out += "," + mode_label(mode_from_index(j));
  out += "\n";
  for (int i = 0; i < 8; ++i) {
    out += mode_label(mode_from_index(i));
    for (int j = 0; j < 8; ++j) out += "," + num(m.p(i, j));
    out += "\n";
  }
  return out;
}

namespace {

double matrix_fidelity_se(const CrosstalkMatrix& m) {
  double var = 0.0;
  for (int i = 0; i < 8; ++i) var += m.se(i, i) * m.se(i, i);
  return std::sqrt(var) / 8.0;
}

}  // namespace

json crosstalk_json(const CrosstalkMatrix& m) {
  json out;
  out["subspace_l"] = m.subspace_l;
  out["trials_per_mode"] = m.trials_per_mode;
  json labels = json::array();
  for (int i = 0; i < 8; ++i) labels.push_back(mode_label(mode_from_index(i)));
  out["modes"] = std::move(labels);
  out["fidelity"] = fidelity_from_matrix(m);
  out["fidelity_se"] = matrix_fidelity_se(m);
  json p = json::array();
  json se = json::array();
  for (int i = 0; i < 8; ++i) {
    json prow = json::array();
    json serow = json::array();
    for (int j = 0; j < 8; ++j) {
      prow.push_back(m.p(i, j));
      serow.push_back(m.se(i, j));
    }
    p.push_back(std::move(prow));
    se.push_back(std::move(serow));
  }
  out["p"] = std::move(p);
  out["se"] = std::move(se);
  return out;
}

std::string render_heatmap(const CrosstalkMatrix& m) {
  std::string out = "        ";
  for (int j = 0; j < 8; ++j) out += "   " + mode_label(mode_from_index(j));
  out += "\n";
  for (int i = 0; i < 8; ++i) {
    out += "    " + mode_label(mode_from_index(i));
    for (int j = 0; j < 8; ++j) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), " %5.3f", m.p(i, j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

namespace {

json metrics_json(const SecurityMetrics& m) {
  json out;
  out["fidelity"] = m.fidelity;
  out["qber"] = m.qber;
  out["mutual_info_ab"] = m.mutual_info_ab;
  out["cloning_fidelity"] = m.cloning_fidelity;
  out["mutual_info_ae"] = m.mutual_info_ae;
  out["key_rate"] = m.key_rate;
  out["capacity_per_dimension"] = m.capacity_per_dimension;
  out["key_rate_clamped"] = m.clamped;
  return out;
}

}  // namespace

json security_report_json(const SecurityReport& r) {
  json out;
  out["dimension"] = r.dimension;
  out["info_variant"] = to_string(r.variant);
  out["qber_bound"] = r.qber_bound;
  out["verdict"] = r.secure ? "secure" : "insecure";
  out["measured"] = metrics_json(r.measured);
  out["measured"]["fidelity_se"] = matrix_fidelity_se(r.matrix);
  out["ideal"] = metrics_json(r.ideal);
  out["crosstalk"] = crosstalk_json(r.matrix);
  return out;
}

std::string render_report_table(const SecurityReport& r) {
  const auto line = [](const char* name, double measured, double ideal) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "  %-22s %10.4f %10.4f\n", name, measured, ideal);
    return std::string(buf);
  };
  std::string out = "  metric                   measured      ideal\n";
  out += line("fidelity F", r.measured.fidelity, r.ideal.fidelity);
  out += line("qber Q", r.measured.qber, r.ideal.qber);
  out += line("I(A;B) bits", r.measured.mutual_info_ab, r.ideal.mutual_info_ab);
  out += line("cloning F_E", r.measured.cloning_fidelity, r.ideal.cloning_fidelity);
  out += line("I(A;E) bits", r.measured.mutual_info_ae, r.ideal.mutual_info_ae);
  out += line("key rate R", r.measured.key_rate, r.ideal.key_rate);
  out += line("R per dimension", r.measured.capacity_per_dimension, r.ideal.capacity_per_dimension);
  char tail[96];
  std::snprintf(tail, sizeof(tail), "  verdict: %s (Q bound %.2f for d=%d)\n",
                r.secure ? "secure" : "insecure", r.qber_bound, r.dimension);
  return out + tail;
}

json transcript_record_json(const ProtocolSymbol& sym) {
  json rec;
  rec["index"] = sym.index;
  rec["alice_basis"] = to_string(sym.alice_basis);
  rec["alice_bits"] = bits_label(sym.alice_bits);
  rec["bob_basis"] = to_string(sym.bob_basis);
  rec["bob_bits"] = sym.bob_bits ? json(bits_label(*sym.bob_bits)) : json(nullptr);
  rec["clicked"] = sym.clicked;
  return rec;
}

std::string transcript_ndjson(const Transcript& t) {
  std::string out;
  for (const auto& sym : t.symbols) {
    out += transcript_record_json(sym).dump();
    out += "\n";
  }
  return out;
}

json bb84_summary_json(const Transcript& t, double qber_value, std::uint64_t key_bits) {
  const TranscriptStats stats = tally(t);
  json out;
  out["bench"] = t.bench_name;
  out["scheme"] = to_string(t.scheme);
  out["eve"] = to_string(t.eve.kind);
  out["eve_basis_choice_bias"] = t.eve.basis_choice_bias;
  out["seed"] = t.seed;
  out["symbols"] = stats.symbols;
  out["emitted"] = stats.emitted;
  out["multi_photon"] = stats.multi_photon;
  out["clicked"] = stats.clicked;
  out["sifted"] = stats.sifted;
  out["sift_fraction_raw"] =
      stats.symbols > 0 ? json(static_cast<double>(stats.sifted) / static_cast<double>(stats.symbols)) : json(nullptr);
  out["sift_fraction_detected"] =
      stats.clicked > 0 ? json(static_cast<double>(stats.sifted) / static_cast<double>(stats.clicked)) : json(nullptr);
  out["qber"] = stats.sifted > 0 ? json(qber_value) : json(nullptr);
  out["key_bits"] = key_bits;
  return out;
}

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] & 1u) {
      out[i / 8] = static_cast<std::uint8_t>(out[i / 8] | (1u << (7 - i % 8)));
    }
  }
  return out;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes) {
  std::vector<std::uint8_t> bits;
  bits.reserve(bytes.size() * 8);
  for (const std::uint8_t byte : bytes) {
    for (int b = 7; b >= 0; --b) {
      bits.push_back(static_cast<std::uint8_t>((byte >> b) & 1u));
    }
  }
  return bits;
}

std::string hex_string(const std::vector<std::uint8_t>& bytes) {
  static const char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const std::uint8_t byte : bytes) {
    out += digits[byte >> 4];
    out += digits[byte & 0xf];
  }
  return out;
}

}  // namespace hdqkd::io
