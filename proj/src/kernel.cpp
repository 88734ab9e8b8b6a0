#include "osp/kernel.hpp"

#include <cmath>
#include <sstream>

#include "osp/errors.hpp"

namespace osp {

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw InputError("gaussian bandwidth must be positive");
  return KernelSpec(GaussianKernel{bandwidth}, 1.0);
}

KernelSpec KernelSpec::linear(double kappa_bound) {
  if (!(kappa_bound > 0.0)) throw InputError("kappa bound must be positive");
  return KernelSpec(LinearKernel{}, kappa_bound);
}

KernelSpec KernelSpec::polynomial(int degree, double offset, double kappa_bound) {
  if (degree < 1) throw InputError("polynomial degree must be >= 1");
  if (!(offset >= 0.0)) throw InputError("polynomial offset must be nonnegative");
  if (!(kappa_bound > 0.0)) throw InputError("kappa bound must be positive");
  return KernelSpec(PolynomialKernel{degree, offset}, kappa_bound);
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, GaussianKernel>) {
          out << "gaussian(bandwidth=" << f.bandwidth << ")";
        } else if constexpr (std::is_same_v<F, LinearKernel>) {
          out << "linear";
        } else {
          out << "polynomial(degree=" << f.degree << ",offset=" << f.offset << ")";
        }
      },
      family_);
  out << " kappa=" << kappa_;
  return out.str();
}

double KernelSpec::operator()(const Point& a, const Point& b) const {
  if (a.size() != b.size())
    throw InputError("kernel arguments have dimensions " + std::to_string(a.size()) +
                     " and " + std::to_string(b.size()));
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, GaussianKernel>) {
          const double sq = (a - b).squaredNorm();
          return std::exp(-sq / (2.0 * f.bandwidth * f.bandwidth));
        } else if constexpr (std::is_same_v<F, LinearKernel>) {
          return a.dot(b);
        } else {
          return std::pow(a.dot(b) + f.offset, f.degree);
        }
      },
      family_);
}

bool KernelSpec::within_kappa(const Point& x) const {
  if (std::holds_alternative<GaussianKernel>(family_)) return true;
  return (*this)(x, x) <= kappa_ * kappa_ * (1.0 + 1e-12);
}

}  // namespace osp
