#include "svmboot/law.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svmboot/error.hpp"
#include "svmboot/io.hpp"

namespace svmboot {

EmpiricalLaw::EmpiricalLaw(Eigen::MatrixXd draws, std::string label)
    : draws_(std::move(draws)), label_(std::move(label)) {
  if (draws_.rows() < 1 || draws_.cols() < 1) {
    throw InputError("law", "an empirical law needs at least one draw");
  }
  if (!draws_.allFinite()) throw InputError("law", "empirical law draws must be finite");
}

EmpiricalLaw EmpiricalLaw::scalar(const std::vector<double>& draws, std::string label) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(draws.size()), 1);
  for (std::size_t i = 0; i < draws.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = draws[i];
  return EmpiricalLaw(std::move(m), std::move(label));
}

EmpiricalLaw EmpiricalLaw::marginal(Eigen::Index j) const {
  if (j < 0 || j >= width()) throw InputError("law", "marginal index out of range");
  return EmpiricalLaw(draws_.col(j), label_ + "[" + std::to_string(j) + "]");
}

std::vector<double> EmpiricalLaw::sorted() const {
  if (!is_scalar()) throw InputError("law", "expected a scalar law, got width " + std::to_string(width()));
  std::vector<double> v(draws_.data(), draws_.data() + draws_.rows());
  std::sort(v.begin(), v.end());
  return v;
}

double kolmogorov_distance(const EmpiricalLaw& a, const EmpiricalLaw& b) {
  const std::vector<double> xa = a.sorted();
  const std::vector<double> xb = b.sorted();
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  // Walk the merged support; evaluate both right-continuous ECDFs after
  // consuming every draw equal to the current value.
  while (i < xa.size() || j < xb.size()) {
    const double t = (j >= xb.size() || (i < xa.size() && xa[i] <= xb[j])) ? xa[i] : xb[j];
    while (i < xa.size() && xa[i] == t) ++i;
    while (j < xb.size() && xb[j] == t) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

double bounded_lipschitz_distance(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                  int grid_resolution) {
  if (grid_resolution < 2) {
    throw ConfigError("law", "grid_resolution must be >= 2", "grid_resolution");
  }
  const std::vector<double> xa = a.sorted();
  const std::vector<double> xb = b.sorted();
  const double lo = std::min(xa.front(), xb.front());
  const double hi = std::max(xa.back(), xb.back());
  if (!(hi > lo)) return 0.0;

  std::vector<double> nodes;
  nodes.reserve(xa.size() + xb.size() + static_cast<std::size_t>(grid_resolution));
  nodes.insert(nodes.end(), xa.begin(), xa.end());
  nodes.insert(nodes.end(), xb.begin(), xb.end());
  for (int k = 0; k < grid_resolution; ++k) {
    nodes.push_back(lo + (hi - lo) * k / (grid_resolution - 1));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());
  auto ia = xa.begin();
  auto ib = xb.begin();
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    ia = std::upper_bound(ia, xa.end(), nodes[k]);
    ib = std::upper_bound(ib, xb.end(), nodes[k]);
    const double fa = static_cast<double>(ia - xa.begin()) / na;
    const double fb = static_cast<double>(ib - xb.begin()) / nb;
    integral += std::abs(fa - fb) * (nodes[k + 1] - nodes[k]);
  }
  return std::min(1.0, integral);
}

double quantile(const EmpiricalLaw& a, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("law", "quantile level must be in [0, 1]", "q");
  const std::vector<double> x = a.sorted();
  const double pos = static_cast<double>(x.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= x.size()) return x.back();
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

std::pair<double, double> percentile_ci(const EmpiricalLaw& a, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("law", "confidence level must be in (0, 1)", "level");
  }
  if (a.count() < 2) throw InputError("law", "percentile_ci needs at least two draws");
  const double tail = 0.5 * (1.0 - level);
  return {quantile(a, tail), quantile(a, 1.0 - tail)};
}

void write_law_csv(const std::filesystem::path& path, const EmpiricalLaw& law,
                   const std::vector<std::string>& header) {
  std::vector<std::string> names = header;
  if (names.empty()) {
    for (Eigen::Index j = 0; j < law.width(); ++j) names.push_back("g" + std::to_string(j));
  }
  if (static_cast<Eigen::Index>(names.size()) != law.width()) {
    throw InputError("law", "CSV header width does not match the law");
  }
  write_matrix_csv(path, law.draws(), names);
}

EmpiricalLaw read_law_csv(const std::filesystem::path& path) {
  const CsvTable table = read_matrix_csv(path);
  return EmpiricalLaw(table.values, path.stem().string());
}

}  // namespace svmboot
