#include "osp/losses.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "osp/errors.hpp"

namespace osp {

namespace {

constexpr std::size_t kMaxTableEntries = std::size_t{1} << 22;

std::size_t checked_pow(std::size_t base, int exponent, std::size_t cap) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    out *= base;
    if (out > cap) throw CapacityError("enumeration size exceeds " + std::to_string(cap));
  }
  return out;
}

std::vector<int> digits(std::size_t index, int base, int length) {
  std::vector<int> out(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(base));
    index /= static_cast<std::size_t>(base);
  }
  return out;
}

std::string join(const std::vector<int>& xs, char open, char close) {
  std::ostringstream out;
  out << open;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  out << close;
  return out.str();
}

std::string subset_string(std::size_t mask) {
  std::vector<int> elems;
  for (int i = 0; mask >> i; ++i)
    if ((mask >> i) & 1U) elems.push_back(i + 1);
  return join(elems, '{', '}');
}

}  // namespace

std::string builtin_name(const BuiltinLoss& loss) {
  return std::visit(
      [](const auto& l) -> std::string {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, SubsetF1>) return "subset_f1(k=" + std::to_string(l.k) + ")";
        else if constexpr (std::is_same_v<L, Ordinal>) return "ordinal(k=" + std::to_string(l.k) + ")";
        else if constexpr (std::is_same_v<L, Hamming>)
          return "hamming(alphabet=" + std::to_string(l.alphabet) +
                 ",length=" + std::to_string(l.length) + ")";
        else
          return "ranking(num_docs=" + std::to_string(l.num_docs) +
                 ",score_levels=" + std::to_string(l.score_levels) + ")";
      },
      loss);
}

std::shared_ptr<const LossSpace> LossSpace::builtin(const BuiltinLoss& loss,
                                                    std::size_t max_size) {
  std::shared_ptr<LossSpace> space(new LossSpace());
  space->name_ = builtin_name(loss);
  space->builtin_ = loss;

  if (const auto* f1 = std::get_if<SubsetF1>(&loss)) {
    if (f1->k < 1) throw InputError("subset_f1 requires k >= 1");
    const std::size_t n = checked_pow(2, f1->k, max_size);
    space->num_outputs_ = space->num_labels_ = n;
    space->fn_ = [](OutputIndex z, LabelIndex y) -> double {
      const int nz = std::popcount(z), ny = std::popcount(y);
      if (nz == 0 && ny == 0) return -1.0;
      if (nz == 0 || ny == 0) return 0.0;
      return -2.0 * std::popcount(z & y) / static_cast<double>(nz + ny);
    };
    space->describe_output_ = space->describe_label_ = subset_string;
  } else if (const auto* ord = std::get_if<Ordinal>(&loss)) {
    if (ord->k < 2) throw InputError("ordinal requires k >= 2");
    const std::size_t n = static_cast<std::size_t>(ord->k);
    if (n > max_size) throw CapacityError("ordinal chain exceeds " + std::to_string(max_size));
    space->num_outputs_ = space->num_labels_ = n;
    const double norm = static_cast<double>(ord->k - 1);
    space->fn_ = [norm](OutputIndex z, LabelIndex y) {
      return std::fabs(static_cast<double>(z) - static_cast<double>(y)) / norm;
    };
    space->describe_output_ = space->describe_label_ = [](std::size_t i) {
      return std::to_string(i + 1);
    };
  } else if (const auto* ham = std::get_if<Hamming>(&loss)) {
    if (ham->alphabet < 2 || ham->length < 1)
      throw InputError("hamming requires alphabet >= 2 and length >= 1");
    const std::size_t n = checked_pow(static_cast<std::size_t>(ham->alphabet), ham->length, max_size);
    space->num_outputs_ = space->num_labels_ = n;
    const int a = ham->alphabet, len = ham->length;
    space->fn_ = [a, len](OutputIndex z, LabelIndex y) {
      int mismatches = 0;
      for (int i = 0; i < len; ++i) {
        mismatches += (z % static_cast<std::size_t>(a)) != (y % static_cast<std::size_t>(a));
        z /= static_cast<std::size_t>(a);
        y /= static_cast<std::size_t>(a);
      }
      return static_cast<double>(mismatches) / len;
    };
    space->describe_output_ = space->describe_label_ = [a, len](std::size_t i) {
      return join(digits(i, a, len), '(', ')');
    };
  } else {
    const auto& rk = std::get<Ranking>(loss);
    if (rk.num_docs < 1 || rk.score_levels < 2)
      throw InputError("ranking requires num_docs >= 1 and score_levels >= 2");
    std::size_t n_perm = 1;
    for (int i = 2; i <= rk.num_docs; ++i) {
      n_perm *= static_cast<std::size_t>(i);
      if (n_perm > max_size) throw CapacityError("permutation count exceeds " + std::to_string(max_size));
    }
    const std::size_t n_lab =
        checked_pow(static_cast<std::size_t>(rk.score_levels), rk.num_docs, max_size);
    auto perms = std::make_shared<std::vector<std::vector<int>>>();
    std::vector<int> p(static_cast<std::size_t>(rk.num_docs));
    std::iota(p.begin(), p.end(), 0);
    do perms->push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    std::vector<double> w(static_cast<std::size_t>(rk.num_docs));
    double wsum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = 1.0 / std::log2(static_cast<double>(i) + 2.0);
      wsum += w[i];
    }
    const double norm = (rk.score_levels - 1) * wsum;
    space->num_outputs_ = n_perm;
    space->num_labels_ = n_lab;
    const int levels = rk.score_levels, docs = rk.num_docs;
    space->fn_ = [perms, w, norm, levels, docs](OutputIndex z, LabelIndex y) {
      const std::vector<int> scores = digits(y, levels, docs);
      const auto& sigma = (*perms)[z];
      double dcg = 0.0;
      for (std::size_t i = 0; i < sigma.size(); ++i)
        dcg += w[i] * scores[static_cast<std::size_t>(sigma[i])];
      return -dcg / norm;
    };
    space->describe_output_ = [perms](std::size_t i) { return join((*perms)[i], '[', ']'); };
    space->describe_label_ = [levels, docs](std::size_t i) {
      return join(digits(i, levels, docs), '(', ')');
    };
  }
  space->finish();
  return space;
}

std::shared_ptr<const LossSpace> LossSpace::custom(std::string name, std::size_t num_outputs,
                                                   std::size_t num_labels, DeltaFn delta,
                                                   std::size_t max_size) {
  if (num_outputs == 0 || num_labels == 0) throw InputError("loss space must be nonempty");
  if (num_outputs > max_size || num_labels > max_size)
    throw CapacityError("loss space size exceeds " + std::to_string(max_size));
  if (!delta) throw InputError("custom loss requires a delta function");
  std::shared_ptr<LossSpace> space(new LossSpace());
  space->name_ = std::move(name);
  space->num_outputs_ = num_outputs;
  space->num_labels_ = num_labels;
  space->fn_ = std::move(delta);
  space->describe_output_ = space->describe_label_ = [](std::size_t i) {
    return std::to_string(i);
  };
  space->finish();
  return space;
}

void LossSpace::finish() {
  if (num_outputs_ * num_labels_ > kMaxTableEntries) return;
  const auto nz = static_cast<Eigen::Index>(num_outputs_);
  const auto ny = static_cast<Eigen::Index>(num_labels_);
  table_.resize(nz, ny);
  for (Eigen::Index z = 0; z < nz; ++z)
    for (Eigen::Index y = 0; y < ny; ++y)
      table_(z, y) = fn_(static_cast<OutputIndex>(z), static_cast<LabelIndex>(y));
  baselines_.resize(num_labels_);
  for (Eigen::Index y = 0; y < ny; ++y) {
    Eigen::Index best = 0;
    for (Eigen::Index z = 1; z < nz; ++z)
      if (table_(z, y) < table_(best, y)) best = z;
    baselines_[static_cast<std::size_t>(y)] = static_cast<OutputIndex>(best);
  }
}

void LossSpace::check_output(OutputIndex z) const {
  if (z >= num_outputs_)
    throw InputError("output index " + std::to_string(z) + " outside " + name_);
}

void LossSpace::check_label(LabelIndex y) const {
  if (y >= num_labels_)
    throw InputError("label index " + std::to_string(y) + " outside " + name_);
}

double LossSpace::delta(OutputIndex z, LabelIndex y) const {
  check_output(z);
  check_label(y);
  return delta_unchecked(z, y);
}

double LossSpace::output_kernel(LabelIndex y, LabelIndex y2) const {
  check_label(y);
  check_label(y2);
  return y == y2 ? 1.0 : 0.0;
}

double LossSpace::c_delta() const {
  std::call_once(c_delta_once_, [this] {
    double best = 0.0;
    for (OutputIndex z = 0; z < num_outputs_; ++z) {
      double sq = 0.0;
      for (LabelIndex y = 0; y < num_labels_; ++y) {
        const double d = delta_unchecked(z, y);
        sq += d * d;
      }
      best = std::max(best, std::sqrt(sq));
    }
    c_delta_ = best;
  });
  return c_delta_;
}

OutputIndex LossSpace::baseline(LabelIndex y) const {
  check_label(y);
  if (!baselines_.empty()) return baselines_[y];
  OutputIndex best = 0;
  double best_loss = delta_unchecked(0, y);
  for (OutputIndex z = 1; z < num_outputs_; ++z) {
    const double d = delta_unchecked(z, y);
    if (d < best_loss) {
      best = z;
      best_loss = d;
    }
  }
  return best;
}

std::string LossSpace::describe_output(OutputIndex z) const {
  check_output(z);
  return describe_output_(z);
}

std::string LossSpace::describe_label(LabelIndex y) const {
  check_label(y);
  return describe_label_(y);
}

CanonicalEmbedding canonical_embedding(const LossSpace& space, std::size_t max_entries) {
  const std::size_t nz = space.num_outputs(), ny = space.num_labels();
  if (ny > max_entries / nz)
    throw CapacityError("canonical embedding table of " + std::to_string(nz) + " x " +
                        std::to_string(ny) + " exceeds " + std::to_string(max_entries) +
                        " entries");
  CanonicalEmbedding emb;
  emb.psi.resize(static_cast<Eigen::Index>(nz), static_cast<Eigen::Index>(ny));
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t y = 0; y < ny; ++y)
      emb.psi(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(y)) = space.delta_unchecked(z, y);
  for (Eigen::Index z = 0; z < emb.psi.rows(); ++z)
    emb.c_delta = std::max(emb.c_delta, emb.psi.row(z).norm());
  return emb;
}

std::size_t subset_index(std::initializer_list<int> elements) {
  std::size_t mask = 0;
  for (int e : elements) {
    if (e < 1 || e > 63) throw InputError("subset element out of range");
    mask |= std::size_t{1} << (e - 1);
  }
  return mask;
}

std::size_t ordinal_index(int value) {
  if (value < 1) throw InputError("ordinal values start at 1");
  return static_cast<std::size_t>(value - 1);
}

std::size_t sequence_index(int alphabet, const std::vector<int>& symbols) {
  std::size_t index = 0;
  for (int s : symbols) {
    if (s < 0 || s >= alphabet) throw InputError("symbol outside alphabet");
    index = index * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s);
  }
  return index;
}

}  // namespace osp
