#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "osp/losses.hpp"

namespace osp {

// A vector of H = R^{|Y|} written as sum_l c_l phi(l) over observed labels,
// stored sparsely and sorted by label index. Every feature estimate g(x) in
// this library is a LabelExpansion, so norms reduce to the Dirac output
// kernel.
class LabelExpansion {
 public:
  using Term = std::pair<LabelIndex, double>;

  LabelExpansion() = default;

  static LabelExpansion indicator(LabelIndex y, double weight = 1.0);

  void add(LabelIndex label, double weight);
  void add_scaled(const LabelExpansion& other, double scale);

  double coefficient(LabelIndex label) const;
  double squared_norm() const;

  // ||phi(y) - g||^2 = (1 - c_y)^2 + sum_{l != y} c_l^2, never negative.
  double residual(LabelIndex y) const;

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Eigen::VectorXd dense(std::size_t num_labels) const;

  bool operator==(const LabelExpansion&) const = default;

 private:
  std::vector<Term> terms_;
};

// (1/n) sum_i expansions[i]
LabelExpansion average_expansions(std::span<const LabelExpansion> expansions);

// argmin_z <psi(z), g> = argmin_z sum_l c_l Delta(z, l); lowest index on
// ties. An empty expansion decodes to output 0.
OutputIndex decode(const LossSpace& space, const LabelExpansion& g);

// <psi(z), g>
double decoding_score(const LossSpace& space, OutputIndex z, const LabelExpansion& g);

}  // namespace osp
