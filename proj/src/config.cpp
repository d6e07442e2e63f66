#include "firemarg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace firemarg {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  auto num = [&](std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (s.empty() || used != s.size()) throw std::invalid_argument(fmt::format("bad number '{}'", s));
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument(fmt::format("bad range '{}'", text));
    const double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument(fmt::format("bad range '{}'", text));
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
  return out;
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt::format("{}", v[k]);
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + fmt::format("{}", v[k]);
  return s;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument(fmt::format("bad boolean '{}'", s));
}

double parse_number(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 1) throw std::invalid_argument(fmt::format("expected one number, got '{}'", s));
  return v.front();
}

long long parse_integer(const std::string& s) {
  const double v = parse_number(s);
  if (v != std::floor(v)) throw std::invalid_argument(fmt::format("expected an integer, got '{}'", s));
  return static_cast<long long>(v);
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s.front() == '-')
    throw std::invalid_argument(fmt::format("bad seed '{}'", s));
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_list(s)) {
    if (v != std::floor(v)) throw std::invalid_argument(fmt::format("expected integers, got '{}'", s));
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Range parse_range(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 2) throw std::invalid_argument(fmt::format("expected 'lo,hi', got '{}'", s));
  return {v[0], v[1]};
}

std::string show_range(const Range& r) { return fmt::format("{},{}", r.lo, r.hi); }

struct Key {
  std::string section;
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define FM_STR(sec, key, field)                                                           \
  Key { sec, key, [](const RunConfig& c) { return c.field; },                             \
        [](RunConfig& c, const std::string& v) { c.field = v; } }
#define FM_NUM(sec, key, field)                                                           \
  Key { sec, key, [](const RunConfig& c) { return fmt::format("{}", c.field); },          \
        [](RunConfig& c, const std::string& v) { c.field = parse_number(v); } }
#define FM_INT(sec, key, field, type)                                                     \
  Key { sec, key, [](const RunConfig& c) { return fmt::format("{}", c.field); },          \
        [](RunConfig& c, const std::string& v) { c.field = static_cast<type>(parse_integer(v)); } }
#define FM_BOOL(sec, key, field)                                                          \
  Key { sec, key, [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }, \
        [](RunConfig& c, const std::string& v) { c.field = parse_bool(v); } }
#define FM_LIST(sec, key, field)                                                          \
  Key { sec, key, [](const RunConfig& c) { return join(c.field); },                       \
        [](RunConfig& c, const std::string& v) { c.field = parse_list(v); } }
#define FM_INTS(sec, key, field)                                                          \
  Key { sec, key, [](const RunConfig& c) { return join_ints(c.field); },                  \
        [](RunConfig& c, const std::string& v) { c.field = parse_int_list(v); } }
#define FM_RANGE(sec, key, field)                                                         \
  Key { sec, key, [](const RunConfig& c) { return show_range(c.field); },                 \
        [](RunConfig& c, const std::string& v) { c.field = parse_range(v); } }

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      FM_STR("paths", "input", input),
      FM_STR("paths", "truth", truth),
      FM_STR("paths", "output_dir", output_dir),
      FM_STR("paths", "weights", weights),
      FM_INT("data", "first_month", season.first_month, int),
      FM_INT("data", "last_month", season.last_month, int),
      FM_INT("data", "first_year", season.first_year, int),
      FM_INT("data", "last_year", season.last_year, int),
      FM_LIST("data", "cnt_thresholds", thresholds.cnt),
      FM_LIST("data", "ba_thresholds", thresholds.ba),
      FM_NUM("geo", "earth_radius_km", geo.earth_radius_km),
      FM_NUM("geo", "unit_scale", geo.unit_scale),
      FM_NUM("geo", "cell_lon_width", geo.cell_lon_width),
      FM_NUM("geo", "cell_lat_height", geo.cell_lat_height),
      FM_NUM("geo", "bap_tolerance", geo.bap_tolerance),
      Key{"model", "variant", [](const RunConfig& c) { return std::string(to_string(c.variant)); },
          [](RunConfig& c, const std::string& v) { c.variant = parse_variant(v); }},
      FM_NUM("model", "k1_cnt", k1_cnt),
      FM_NUM("model", "k1_ba", k1_ba),
      FM_NUM("model", "k2", k2),
      FM_INT("model", "ky", ky, int),
      FM_STR("model", "covariate", covariate),
      FM_BOOL("tuning", "enabled", tune),
      FM_LIST("tuning", "radii", grid.radii),
      FM_LIST("tuning", "quantiles", grid.quantiles),
      FM_BOOL("rules", "pair", rules.pair),
      FM_BOOL("rules", "water", rules.water),
      FM_BOOL("rules", "saturation", rules.saturation),
      FM_NUM("rules", "water_cut", water_cut),
      FM_BOOL("rules", "calibrate_water", calibrate_water),
      FM_NUM("rules", "water_target", water_target),
      FM_LIST("explore", "levels", explore.levels),
      FM_NUM("explore", "ci_level", explore.ci_level),
      FM_INT("explore", "replicates", explore.replicates, std::size_t),
      Key{"run", "seed", [](const RunConfig& c) { return fmt::format("{}", c.seed); },
          [](RunConfig& c, const std::string& v) { c.seed = parse_seed(v); }},
      FM_INT("run", "workers", workers, unsigned),
      FM_NUM("synth", "lon_min", synth.lon_min),
      FM_NUM("synth", "lon_max", synth.lon_max),
      FM_NUM("synth", "lat_min", synth.lat_min),
      FM_NUM("synth", "lat_max", synth.lat_max),
      FM_NUM("synth", "spacing", synth.spacing),
      FM_INTS("synth", "months", synth.months),
      FM_INTS("synth", "years", synth.years),
      FM_NUM("synth", "shared_radius_km", synth.shared_radius_km),
      FM_NUM("synth", "hotspot_gap_km", synth.hotspot_gap_km),
      FM_BOOL("synth", "year_varying", synth.year_varying),
      FM_RANGE("synth", "year_effect", synth.year_effect),
      FM_NUM("synth", "missing_rate", synth.missing_rate),
      FM_NUM("synth", "cluster_radius_km", synth.cluster_radius_km),
      FM_NUM("synth", "overlap", synth.overlap),
      FM_NUM("synth", "water_fraction", synth.water_fraction),
      FM_NUM("synth", "partial_fraction", synth.partial_fraction),
      FM_RANGE("synth", "hotspot_pi", synth.hotspot.pi),
      FM_RANGE("synth", "hotspot_mu", synth.hotspot.mu),
      FM_RANGE("synth", "hotspot_r", synth.hotspot.r),
      FM_RANGE("synth", "hotspot_bap_scale", synth.hotspot.bap_scale),
      FM_RANGE("synth", "hotspot_xi", synth.hotspot.xi),
      FM_RANGE("synth", "background_pi", synth.background.pi),
      FM_RANGE("synth", "background_mu", synth.background.mu),
      FM_RANGE("synth", "background_r", synth.background.r),
      FM_RANGE("synth", "background_bap_scale", synth.background.bap_scale),
      FM_RANGE("synth", "background_xi", synth.background.xi),
  };
  return k;
}

#undef FM_STR
#undef FM_NUM
#undef FM_INT
#undef FM_BOOL
#undef FM_LIST
#undef FM_INTS
#undef FM_RANGE

}  // namespace

NeighborhoodSpec RunConfig::spec(Variable v) const {
  return {variant, v == Variable::Count ? k1_cnt : k1_ba,
          variant == NeighborhoodVariant::Temporal ? ky : 0,
          variant == NeighborhoodVariant::Cluster ? covariate : std::string()};
}

DatasetOptions RunConfig::dataset_options() const {
  DatasetOptions o;
  o.season = season;
  o.thresholds = thresholds;
  o.earth_radius_km = geo.earth_radius_km;
  return o;
}

void RunConfig::validate() const {
  auto increasing = [](const std::vector<double>& g, const char* what) {
    if (g.empty()) throw std::invalid_argument(fmt::format("{} is empty", what));
    for (std::size_t k = 1; k < g.size(); ++k)
      if (!(g[k] > g[k - 1])) throw std::invalid_argument(fmt::format("{} must increase", what));
  };
  increasing(thresholds.cnt, "data.cnt_thresholds");
  increasing(thresholds.ba, "data.ba_thresholds");
  spec(Variable::Count).validate();
  spec(Variable::BurntArea).validate();
  if (!(k2 > 0.0 && k2 < 1.0)) throw std::invalid_argument("model.k2 must lie in (0,1)");
  if (tune) grid.validate();
  if (tune && grid.quantiles.empty()) throw std::invalid_argument("tuning.quantiles is empty");
  if (!(geo.earth_radius_km > 0.0) || !(geo.unit_scale > 0.0))
    throw std::invalid_argument("geo: radius and unit scale must be positive");
  if (!input.empty() && !std::filesystem::exists(input))
    throw std::invalid_argument(fmt::format("input file '{}' does not exist", input));
  if (!truth.empty() && !std::filesystem::exists(truth))
    throw std::invalid_argument(fmt::format("truth file '{}' does not exist", truth));
  if (!weights.empty() && !std::filesystem::exists(weights))
    throw std::invalid_argument(fmt::format("weights file '{}' does not exist", weights));
}

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(fmt::format("config: {}", e.message()));
  }
  std::map<std::pair<std::string, std::string>, const Key*> index;
  for (const auto& k : keys()) index[{k.section, k.name}] = &k;

  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw std::invalid_argument(fmt::format("config: key '{}' outside a section", section));
    for (const auto& [name, value] : body) {
      auto it = index.find({section, name});
      if (it == index.end())
        throw std::invalid_argument(fmt::format("config: unknown key [{}] {}", section, name));
      try {
        it->second->set(c, value.data());
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(fmt::format("config: [{}] {}: {}", section, name, e.what()));
      }
    }
  }
  c.synth.geo = c.geo;
  c.explore.seed = c.seed;
  c.explore.workers = c.workers;
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config '{}'", path.string()));
  return parse_config(in);
}

std::string dump_config(const RunConfig& config, bool include_runtime) {
  std::string out, section;
  for (const auto& k : keys()) {
    if (!include_runtime && ((k.section == "run" && k.name == "workers") ||
                             (k.section == "paths" && k.name == "output_dir")))
      continue;
    if (k.section != section) {
      out += (section.empty() ? "" : "\n") + fmt::format("[{}]\n", k.section);
      section = k.section;
    }
    out += fmt::format("{} = {}\n", k.name, k.get(config));
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  for (unsigned int k = 0; k < len; ++k) hex += fmt::format("{:02x}", md[k]);
  return hex;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(dump_config(config, false)); }

ScoreWeights parse_weights(std::istream& in, const ThresholdGrids& grids) {
  ScoreWeights w{{std::vector<double>(grids.cnt.size(), -1.0)},
                 {std::vector<double>(grids.ba.size(), -1.0)}};
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw std::invalid_argument("weights file is empty");
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f_var, f_u, f_w;
    if (!std::getline(ss, f_var, ',') || !std::getline(ss, f_u, ',') || !std::getline(ss, f_w))
      throw DataError(row, "weights row needs variable,threshold,weight");
    const Variable v = parse_variable(f_var);
    const auto& grid = grids.of(v);
    const double u = parse_number(f_u);
    const auto it = std::find(grid.begin(), grid.end(), u);
    if (it == grid.end()) throw DataError(row, fmt::format("threshold {} not in the {} grid", u, f_var));
    auto& slot = (v == Variable::Count ? w.cnt : w.ba).weights[static_cast<std::size_t>(it - grid.begin())];
    if (slot >= 0.0) throw DataError(row, fmt::format("duplicate weight for {} at {}", f_var, u));
    slot = parse_number(f_w);
    if (!(slot >= 0.0)) throw DataError(row, "weights must be nonnegative");
  }
  for (const auto* c : {&w.cnt, &w.ba})
    if (std::any_of(c->weights.begin(), c->weights.end(), [](double x) { return x < 0.0; }))
      throw std::invalid_argument("weights file does not cover every threshold");
  w.cnt.validate(grids.cnt.size());
  w.ba.validate(grids.ba.size());
  return w;
}

ScoreWeights load_weights(const std::filesystem::path& path, const ThresholdGrids& grids) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open weights '{}'", path.string()));
  return parse_weights(in, grids);
}

}  // namespace firemarg
