#include "osp/expansion.hpp"

#include <algorithm>

#include "osp/errors.hpp"

namespace osp {

LabelExpansion LabelExpansion::indicator(LabelIndex y, double weight) {
  LabelExpansion e;
  e.terms_.emplace_back(y, weight);
  return e;
}

void LabelExpansion::add(LabelIndex label, double weight) {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), label,
                             [](const Term& t, LabelIndex l) { return t.first < l; });
  if (it != terms_.end() && it->first == label)
    it->second += weight;
  else
    terms_.insert(it, Term{label, weight});
}

void LabelExpansion::add_scaled(const LabelExpansion& other, double scale) {
  std::vector<Term> merged;
  merged.reserve(terms_.size() + other.terms_.size());
  auto a = terms_.begin();
  auto b = other.terms_.begin();
  while (a != terms_.end() || b != other.terms_.end()) {
    if (b == other.terms_.end() || (a != terms_.end() && a->first < b->first)) {
      merged.push_back(*a++);
    } else if (a == terms_.end() || b->first < a->first) {
      merged.emplace_back(b->first, scale * b->second);
      ++b;
    } else {
      merged.emplace_back(a->first, a->second + scale * b->second);
      ++a;
      ++b;
    }
  }
  terms_ = std::move(merged);
}

double LabelExpansion::coefficient(LabelIndex label) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), label,
                             [](const Term& t, LabelIndex l) { return t.first < l; });
  return (it != terms_.end() && it->first == label) ? it->second : 0.0;
}

double LabelExpansion::squared_norm() const {
  double s = 0.0;
  for (const auto& [l, c] : terms_) s += c * c;
  return s;
}

double LabelExpansion::residual(LabelIndex y) const {
  double s = 0.0;
  bool seen = false;
  for (const auto& [l, c] : terms_) {
    if (l == y) {
      s += (1.0 - c) * (1.0 - c);
      seen = true;
    } else {
      s += c * c;
    }
  }
  return seen ? s : s + 1.0;
}

Eigen::VectorXd LabelExpansion::dense(std::size_t num_labels) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_labels));
  for (const auto& [l, c] : terms_) {
    if (l >= num_labels) throw InputError("expansion label outside label space");
    v[static_cast<Eigen::Index>(l)] = c;
  }
  return v;
}

LabelExpansion average_expansions(std::span<const LabelExpansion> expansions) {
  LabelExpansion sum;
  if (expansions.empty()) return sum;
  for (const auto& e : expansions) sum.add_scaled(e, 1.0);
  LabelExpansion out;
  const double inv = 1.0 / static_cast<double>(expansions.size());
  out.add_scaled(sum, inv);
  return out;
}

double decoding_score(const LossSpace& space, OutputIndex z, const LabelExpansion& g) {
  space.check_output(z);
  double score = 0.0;
  for (const auto& [l, c] : g.terms()) score += c * space.delta_unchecked(z, l);
  return score;
}

OutputIndex decode(const LossSpace& space, const LabelExpansion& g) {
  if (g.empty()) return 0;
  for (const auto& [l, c] : g.terms()) space.check_label(l);
  OutputIndex best = 0;
  double best_score = 0.0;
  for (OutputIndex z = 0; z < space.num_outputs(); ++z) {
    double score = 0.0;
    for (const auto& [l, c] : g.terms()) score += c * space.delta_unchecked(z, l);
    if (z == 0 || score < best_score) {
      best = z;
      best_score = score;
    }
  }
  return best;
}

}  // namespace osp
