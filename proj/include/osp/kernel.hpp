#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

namespace osp {

using Point = Eigen::VectorXd;

struct GaussianKernel {
  double bandwidth = 1.0;
};

struct LinearKernel {};

struct PolynomialKernel {
  int degree = 2;
  double offset = 1.0;
};

using KernelFamily = std::variant<GaussianKernel, LinearKernel, PolynomialKernel>;

// A positive semidefinite input kernel together with its declared bound
// kappa >= sup_x sqrt(k(x, x)).
class KernelSpec {
 public:
  static KernelSpec gaussian(double bandwidth);
  static KernelSpec linear(double kappa_bound);
  static KernelSpec polynomial(int degree, double offset, double kappa_bound);

  const KernelFamily& family() const { return family_; }
  double kappa() const { return kappa_; }
  std::string describe() const;

  // Throws InputError on dimension mismatch.
  double operator()(const Point& a, const Point& b) const;

  // True when sqrt(k(x, x)) does not exceed the declared bound (with a
  // relative slack of 1e-12).
  bool within_kappa(const Point& x) const;

 private:
  KernelSpec(KernelFamily family, double kappa) : family_(family), kappa_(kappa) {}

  KernelFamily family_;
  double kappa_;
};

inline double eval_kernel(const KernelSpec& spec, const Point& a, const Point& b) {
  return spec(a, b);
}

}  // namespace osp
