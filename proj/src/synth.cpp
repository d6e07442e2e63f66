#include "firemarg/synth.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace firemarg {

namespace {

void check_range(const Range& r, const char* what, double min_lo, double max_hi) {
  if (!(r.lo >= min_lo && r.hi >= r.lo && r.hi <= max_hi))
    throw std::invalid_argument(fmt::format("synthetic spec: bad {} range [{}, {}]", what, r.lo, r.hi));
}

void check_ranges(const MarginalRanges& m) {
  check_range(m.pi, "pi", 0.0, 1.0);
  check_range(m.mu, "mu", 1e-9, 1e9);
  check_range(m.r, "r", 1e-9, 1e9);
  check_range(m.bap_scale, "bap_scale", 1e-300, 1.0);
  check_range(m.xi, "xi", -0.5, 2.0);
}

double km_per_degree(double radius_km) { return radius_km * std::numbers::pi / 180.0; }

struct Grid {
  std::size_t nlon = 0, nlat = 0;
  double lon(const SyntheticSpec& s, std::size_t k) const { return s.lon_min + (k + 0.5) * s.spacing; }
  double lat(const SyntheticSpec& s, std::size_t k) const { return s.lat_min + (k + 0.5) * s.spacing; }
};

Grid make_grid(const SyntheticSpec& s) {
  Grid g;
  g.nlon = static_cast<std::size_t>(std::llround((s.lon_max - s.lon_min) / s.spacing));
  g.nlat = static_cast<std::size_t>(std::llround((s.lat_max - s.lat_min) / s.spacing));
  return g;
}

// Hotspot centres as grid-cell coordinates (lon index, lat index).
std::vector<std::pair<std::size_t, std::size_t>> hotspot_cells(const SyntheticSpec& s, const Grid& g) {
  const double mid_lat = (s.lat_min + s.lat_max) / 2.0;
  const double km_lat = km_per_degree(s.geo.earth_radius_km) * s.spacing;
  const double km_lon = km_lat * std::cos(mid_lat * std::numbers::pi / 180.0);
  const double reach = s.shared_radius_km + s.hotspot_gap_km / 2.0;
  const double step = 2.0 * s.shared_radius_km + s.hotspot_gap_km;
  const auto off_lon = static_cast<std::size_t>(std::ceil(reach / km_lon));
  const auto off_lat = static_cast<std::size_t>(std::ceil(reach / km_lat));
  const auto step_lon = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(step / km_lon)));
  const auto step_lat = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(step / km_lat)));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  // The validation site east of the centre must be on the grid too.
  for (std::size_t b = off_lat; b + off_lat <= g.nlat; b += step_lat)
    for (std::size_t a = off_lon; a + off_lon <= g.nlon && a + 1 < g.nlon; a += step_lon)
      out.emplace_back(a, b);
  return out;
}

double uniform(std::mt19937_64& rng, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return boost::random::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

double log_uniform(std::mt19937_64& rng, const Range& r) {
  return std::exp(uniform(rng, {std::log(r.lo), std::log(r.hi)}));
}

struct Marginal {
  ZinbParams cnt;
  double scale;
  double xi;
};

Marginal draw_marginal(std::mt19937_64& rng, const MarginalRanges& m) {
  Marginal out;
  out.cnt.pi = uniform(rng, m.pi);
  out.cnt.mu = log_uniform(rng, m.mu);
  out.cnt.r = uniform(rng, m.r);
  out.scale = log_uniform(rng, m.bap_scale);
  out.xi = uniform(rng, m.xi);
  return out;
}

enum Mask : unsigned { kNone = 0, kCnt = 1, kBa = 2, kBoth = 3 };

Mask draw_mask(std::mt19937_64& rng, double overlap) {
  if (boost::random::bernoulli_distribution<double>(overlap)(rng)) return kBoth;
  return boost::random::bernoulli_distribution<double>(0.5)(rng) ? kCnt : kBa;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (!(spacing > 0.0)) throw std::invalid_argument("synthetic spec: spacing must be positive");
  if (!(lon_max > lon_min) || !(lat_max > lat_min))
    throw std::invalid_argument("synthetic spec: empty extent");
  if (lat_min < -89.0 || lat_max > 89.0) throw std::invalid_argument("synthetic spec: extent reaches a pole");
  if (months.empty() || years.empty()) throw std::invalid_argument("synthetic spec: no months or years");
  if (!(shared_radius_km > 0.0) || !(hotspot_gap_km >= 0.0))
    throw std::invalid_argument("synthetic spec: radius must be positive and gap nonnegative");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0))
    throw std::invalid_argument("synthetic spec: missing rate outside [0,1)");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw std::invalid_argument("synthetic spec: overlap outside [0,1]");
  if (!(water_fraction >= 0.0 && water_fraction < 1.0) || !(partial_fraction >= 0.0 && partial_fraction <= 1.0))
    throw std::invalid_argument("synthetic spec: bad cell fractions");
  if (!(cluster_radius_km >= 0.0)) throw std::invalid_argument("synthetic spec: negative cluster radius");
  check_ranges(hotspot);
  check_ranges(background);
  check_range(year_effect, "year_effect", 1e-9, 1e9);
  if (hotspot_cells(*this, make_grid(*this)).empty())
    throw std::invalid_argument(fmt::format(
        "synthetic spec: radius {} km leaves no room for a hotspot in the domain", shared_radius_km));
}

std::int64_t sample_zinb(const ZinbParams& p, std::mt19937_64& rng) {
  if (boost::random::bernoulli_distribution<double>(p.pi)(rng)) return 0;
  const double lambda = boost::random::gamma_distribution<double>(p.r, p.mu / p.r)(rng);
  if (!(lambda > 0.0)) return 0;
  return boost::random::poisson_distribution<std::int64_t, double>(lambda)(rng);
}

double sample_bap(double scale, double xi, std::mt19937_64& rng) {
  const double u = boost::random::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const double y = std::abs(xi) < 1e-12 ? -std::log1p(-u) : std::expm1(-xi * std::log1p(-u)) / xi;
  return std::min(1.0, scale * y);
}

SyntheticData synth(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  const Grid g = make_grid(spec);
  const auto centres = hotspot_cells(spec, g);
  const double R = spec.geo.earth_radius_km;
  const std::size_t ncell = g.nlon * g.nlat;

  // Static cell properties.
  std::vector<int> cell_hotspot(ncell, -1);
  std::vector<bool> validation_cell(ncell, false);
  for (std::size_t c = 0; c < ncell; ++c) {
    const LonLat p{g.lon(spec, c % g.nlon), g.lat(spec, c / g.nlon)};
    for (std::size_t h = 0; h < centres.size(); ++h) {
      const LonLat q{g.lon(spec, centres[h].first), g.lat(spec, centres[h].second)};
      if (haversine_km(q, p, R) <= spec.shared_radius_km) cell_hotspot[c] = static_cast<int>(h);
    }
  }
  for (const auto& [a, b] : centres) validation_cell[b * g.nlon + a + 1] = true;

  std::vector<bool> water(ncell, false);
  std::vector<double> area_fraction(ncell, 1.0), altitude(ncell);
  std::vector<std::array<double, kLandCoverCount>> land(ncell);
  for (std::size_t c = 0; c < ncell; ++c) {
    water[c] = cell_hotspot[c] < 0 &&
               boost::random::bernoulli_distribution<double>(spec.water_fraction)(rng);
    if (boost::random::bernoulli_distribution<double>(spec.partial_fraction)(rng))
      area_fraction[c] = uniform(rng, {0.3, 0.999});
    altitude[c] = uniform(rng, {0.0, 3000.0});
    auto& lc = land[c];
    const double w = water[c] ? uniform(rng, {0.951, 1.0}) : uniform(rng, {0.0, 0.3});
    double rest = 0.0;
    for (std::size_t k = 0; k + 1 < kLandCoverCount; ++k) rest += (lc[k] = uniform(rng, {0.0, 1.0}));
    for (std::size_t k = 0; k + 1 < kLandCoverCount; ++k) lc[k] *= (1.0 - w) / rest;
    lc[kWaterLandCover] = w;
  }

  // Hotspot marginals: per (hotspot, month, year), or per (hotspot, month).
  const std::size_t nm = spec.months.size(), ny = spec.years.size(), nh = centres.size();
  std::vector<Marginal> hot(nh * nm * ny);
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t m = 0; m < nm; ++m) {
      const Marginal fixed = draw_marginal(rng, spec.hotspot);
      for (std::size_t y = 0; y < ny; ++y)
        hot[(h * nm + m) * ny + y] = spec.year_varying ? draw_marginal(rng, spec.hotspot) : fixed;
    }
  std::vector<double> effect(nm * ny, 1.0);
  if (spec.year_varying)
    for (auto& e : effect) e = log_uniform(rng, spec.year_effect);
  std::vector<Marginal> back(nm * ny);
  for (std::size_t m = 0; m < nm; ++m) {
    const Marginal fixed = draw_marginal(rng, spec.background);
    for (std::size_t y = 0; y < ny; ++y)
      back[m * ny + y] = spec.year_varying ? draw_marginal(rng, spec.background) : fixed;
  }

  // Observations in (year, month, lat, lon) order.
  std::vector<Observation> obs;
  std::vector<TruthRecord> truth;
  obs.reserve(ncell * nm * ny);
  truth.reserve(ncell * nm * ny);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t c = 0; c < ncell; ++c) {
        Observation o;
        o.index = obs.size();
        o.lon = g.lon(spec, c % g.nlon);
        o.lat = g.lat(spec, c / g.nlon);
        o.month = spec.months[m];
        o.year = spec.years[y];
        o.area_fraction = area_fraction[c];
        o.land_cover = land[c];
        o.altitude = altitude[c];
        const double temp = 5.0 + 2.5 * static_cast<double>(o.month) - 0.8 * (o.lat - 40.0) +
                            uniform(rng, {-2.0, 2.0});
        const double precip = log_uniform(rng, {10.0, 150.0});
        o.climate = {temp, precip};

        TruthRecord t;
        t.hotspot = cell_hotspot[c];
        t.water = water[c];
        Marginal mg = t.hotspot >= 0 ? hot[(static_cast<std::size_t>(t.hotspot) * nm + m) * ny + y]
                                     : back[m * ny + y];
        mg.cnt.mu *= effect[m * ny + y];
        mg.scale *= effect[m * ny + y];
        t.cnt_params = mg.cnt;
        t.bap_scale = mg.scale;
        t.bap_xi = mg.xi;
        const double capacity = zone_area_km2({o.lon, o.lat, spec.geo.cell_lon_width, spec.geo.cell_lat_height}, R) *
                                o.area_fraction * spec.geo.unit_scale;
        if (!t.water) {
          t.cnt = sample_zinb(mg.cnt, rng);
          if (t.cnt > 0) {
            t.ba = sample_bap(mg.scale, mg.xi, rng) * capacity;
            // The value BAP ingestion will recompute from BA.
            t.bap = std::min(1.0, t.ba / capacity);
          }
        }
        o.cnt = t.cnt;
        o.ba = t.ba;
        obs.push_back(std::move(o));
        truth.push_back(t);
      }

  // Masks.
  const std::size_t n = obs.size();
  std::vector<unsigned> mask(n, kNone);
  std::size_t masked = 0;
  auto set_mask = [&](std::size_t i, Mask k) {
    if (mask[i] == kNone && k != kNone) ++masked;
    mask[i] |= k;
  };
  if (spec.missing_rate > 0.0) {
    for (std::size_t s = 0; s < nm * ny; ++s)
      for (std::size_t c = 0; c < ncell; ++c)
        if (validation_cell[c]) set_mask(s * ncell + c, draw_mask(rng, spec.overlap));

    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < ncell; ++c)
      if (cell_hotspot[c] < 0) eligible.push_back(c);
    const auto target = static_cast<std::size_t>(std::ceil(spec.missing_rate * static_cast<double>(n)));
    boost::random::uniform_int_distribution<std::size_t> pick_slice(0, nm * ny - 1);
    std::size_t attempts = 0;
    while (masked < target && !eligible.empty() && attempts++ < 100 * n) {
      const std::size_t s = pick_slice(rng);
      const std::size_t c0 =
          eligible[boost::random::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
      const Mask kind = draw_mask(rng, spec.overlap);
      const LonLat p0{obs[s * ncell + c0].lon, obs[s * ncell + c0].lat};
      for (std::size_t c : eligible) {
        if (masked >= target) break;
        const std::size_t i = s * ncell + c;
        if (haversine_km(p0, {obs[i].lon, obs[i].lat}, R) <= spec.cluster_radius_km) set_mask(i, kind);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] & kCnt) obs[i].cnt.reset();
    if (mask[i] & kBa) obs[i].ba.reset();
  }

  DatasetOptions options;
  options.season = {*std::min_element(spec.months.begin(), spec.months.end()),
                    *std::max_element(spec.months.begin(), spec.months.end()),
                    *std::min_element(spec.years.begin(), spec.years.end()),
                    *std::max_element(spec.years.begin(), spec.years.end())};
  options.earth_radius_km = R;

  std::vector<Hotspot> hotspots;
  for (const auto& [a, b] : centres) hotspots.push_back({g.lon(spec, a), g.lat(spec, b)});
  return {Dataset(std::move(obs), {"temperature", "precipitation"}, options), std::move(truth),
          std::move(hotspots)};
}

std::vector<std::optional<double>> truth_values(const SyntheticData& s, Variable v) {
  std::vector<std::optional<double>> out(s.truth.size());
  for (std::size_t i = 0; i < s.truth.size(); ++i)
    out[i] = v == Variable::Count ? static_cast<double>(s.truth[i].cnt) : s.truth[i].ba;
  return out;
}

void write_truth_csv(const SyntheticData& s, std::ostream& out) {
  out << "index,cnt,ba\n";
  for (const auto& o : s.data.observations()) {
    if (!o.missing(Variable::Count) && !o.missing(Variable::BurntArea)) continue;
    const auto& t = s.truth[o.index];
    fmt::print(out, "{},{},{}\n", o.index,
               o.missing(Variable::Count) ? fmt::format("{}", t.cnt) : std::string("NA"),
               o.missing(Variable::BurntArea) ? fmt::format("{}", t.ba) : std::string("NA"));
  }
}

TruthTable read_truth_csv(std::istream& in, std::size_t n) {
  TruthTable t{std::vector<std::optional<double>>(n), std::vector<std::optional<double>>(n)};
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("truth file is empty");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f_index, f_cnt, f_ba;
    if (!std::getline(ss, f_index, ',') || !std::getline(ss, f_cnt, ',') || !std::getline(ss, f_ba))
      throw DataError(row, "truth row needs index,cnt,ba");
    std::size_t i = 0;
    try {
      i = std::stoul(f_index);
    } catch (const std::exception&) {
      throw DataError(row, fmt::format("bad index '{}'", f_index));
    }
    if (i >= n) throw DataError(row, fmt::format("index {} outside the dataset", i));
    try {
      if (!is_missing_token(f_cnt)) t.cnt[i] = std::stod(f_cnt);
      if (!is_missing_token(f_ba)) t.ba[i] = std::stod(f_ba);
    } catch (const std::exception&) {
      throw DataError(row, "bad truth value");
    }
  }
  return t;
}

}  // namespace firemarg
