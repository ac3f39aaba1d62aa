#include "flatcone/measure_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace flatcone {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

std::optional<double> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<double>();
}

json tail_to_json(const std::optional<PowerTail>& tail) {
  if (!tail) return nullptr;
  return {{"coefficient", tail->coefficient},
          {"q", tail->q},
          {"factor_power", tail->factor_power},
          {"power", tail->power}};
}

std::string format_number(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

}  // namespace

json measure_to_json(const Measure1D& mu) {
  json atoms = json::array();
  for (const Atom& atom : mu.atoms()) atoms.push_back({atom.position, atom.mass});
  const PiecewiseDensity& d = mu.density();
  return {{"format_version", std::string(kMeasureFormat)},
          {"atoms", atoms},
          {"breakpoints", d.breakpoints()},
          {"values", d.values()},
          {"cell_masses", d.cell_masses()},
          {"left_exponent", optional_number(d.left_exponent())},
          {"right_exponent", optional_number(d.right_exponent())},
          {"tail", tail_to_json(d.tail())},
          {"total_mass", mu.total_mass()}};
}

Measure1D measure_from_json(const json& doc) {
  try {
    if (doc.value("format_version", std::string()) != kMeasureFormat) {
      throw Error(ErrorKind::ParseError, "unsupported measure format version");
    }
    std::vector<Atom> atoms;
    for (const json& entry : doc.at("atoms")) {
      atoms.push_back({entry.at(0).get<double>(), entry.at(1).get<double>()});
    }
    auto breakpoints = doc.at("breakpoints").get<std::vector<double>>();
    auto values = doc.at("values").get<std::vector<double>>();
    std::optional<PowerTail> tail;
    if (doc.contains("tail") && !doc.at("tail").is_null()) {
      const json& t = doc.at("tail");
      tail = PowerTail{t.at("coefficient").get<double>(), t.at("q").get<double>(),
                       t.at("factor_power").get<int>(), t.at("power").get<double>()};
    }
    const auto left = read_optional(doc, "left_exponent");
    const auto right = read_optional(doc, "right_exponent");
    if (doc.contains("cell_masses")) {
      return Measure1D(std::move(atoms),
                       PiecewiseDensity(std::move(breakpoints), std::move(values),
                                        doc.at("cell_masses").get<std::vector<double>>(), left,
                                        right, tail));
    }
    return Measure1D(std::move(atoms),
                     PiecewiseDensity::from_values(std::move(breakpoints), std::move(values),
                                                   left, right, tail));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed measure JSON: ") + e.what());
  }
}

std::string measure_to_csv(const Measure1D& mu, std::string_view header) {
  std::string out(header);
  out += '\n';
  const PiecewiseDensity& d = mu.density();
  for (std::size_t k = 0; k < d.breakpoints().size(); ++k) {
    out += format_number(d.breakpoints()[k]);
    out += ',';
    out += format_number(d.density_at(d.breakpoints()[k]));
    out += '\n';
  }
  return out;
}

json measure_sidecar(const Measure1D& mu) {
  json atoms = json::array();
  for (const Atom& atom : mu.atoms()) atoms.push_back({atom.position, atom.mass});
  return {{"format_version", std::string(kMeasureFormat)},
          {"atoms", atoms},
          {"tail", tail_to_json(mu.density().tail())},
          {"total_mass", mu.total_mass()}};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace flatcone
