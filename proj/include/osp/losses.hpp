#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace osp {

using OutputIndex = std::size_t;
using LabelIndex = std::size_t;

// Subsets of {1..k}; element i is bit (i-1) of the enumeration index.
struct SubsetF1 {
  int k = 3;
};

// Chain {1..k}; value v has index v-1. Loss |z-y| / (k-1).
struct Ordinal {
  int k = 5;
};

// Sequences over {0..alphabet-1}; position 0 is the most significant digit of
// the index. Loss is the fraction of mismatched positions.
struct Hamming {
  int alphabet = 2;
  int length = 3;
};

// Outputs are permutations of num_docs documents in lexicographic order
// (sigma[i] = document placed at position i); labels are relevance vectors in
// {0..score_levels-1}^num_docs with document 0 as the most significant digit.
// Loss is minus the DCG of sigma divided by its largest possible value.
struct Ranking {
  int num_docs = 3;
  int score_levels = 2;
};

using BuiltinLoss = std::variant<SubsetF1, Ordinal, Hamming, Ranking>;

std::string builtin_name(const BuiltinLoss& loss);

// A finite structured loss Delta(z, y) over enumerated outputs and labels. The
// output kernel is the Dirac kernel of the canonical embedding phi(y) = e_y.
// Immutable after construction; share through shared_ptr<const LossSpace>.
class LossSpace {
 public:
  static constexpr std::size_t kDefaultMaxSize = std::size_t{1} << 16;

  using DeltaFn = std::function<double(OutputIndex, LabelIndex)>;

  static std::shared_ptr<const LossSpace> builtin(const BuiltinLoss& loss,
                                                  std::size_t max_size = kDefaultMaxSize);
  static std::shared_ptr<const LossSpace> custom(std::string name, std::size_t num_outputs,
                                                 std::size_t num_labels, DeltaFn delta,
                                                 std::size_t max_size = kDefaultMaxSize);

  LossSpace(const LossSpace&) = delete;
  LossSpace& operator=(const LossSpace&) = delete;

  const std::string& name() const { return name_; }
  const std::optional<BuiltinLoss>& builtin_loss() const { return builtin_; }
  std::size_t num_outputs() const { return num_outputs_; }
  std::size_t num_labels() const { return num_labels_; }

  // Throws InputError for out-of-space indices.
  double delta(OutputIndex z, LabelIndex y) const;
  double delta_unchecked(OutputIndex z, LabelIndex y) const {
    return table_.size() > 0 ? table_(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(y))
                             : fn_(z, y);
  }

  double output_kernel(LabelIndex y, LabelIndex y2) const;

  // max_z ||psi(z)||_2 for the canonical embedding psi(z) = (Delta(z, y))_y.
  double c_delta() const;

  // argmin_z Delta(z, y), lowest index on ties.
  OutputIndex baseline(LabelIndex y) const;

  std::string describe_output(OutputIndex z) const;
  std::string describe_label(LabelIndex y) const;

  void check_output(OutputIndex z) const;
  void check_label(LabelIndex y) const;

 private:
  LossSpace() = default;
  void finish();

  std::string name_;
  std::optional<BuiltinLoss> builtin_;
  std::size_t num_outputs_ = 0;
  std::size_t num_labels_ = 0;
  DeltaFn fn_;
  Eigen::MatrixXd table_;  // |Z| x |Y| when small enough, else empty
  std::vector<OutputIndex> baselines_;  // filled together with table_
  std::function<std::string(OutputIndex)> describe_output_;
  std::function<std::string(LabelIndex)> describe_label_;

  mutable std::once_flag c_delta_once_;
  mutable double c_delta_ = 0.0;
};

using LossSpacePtr = std::shared_ptr<const LossSpace>;

// Explicit tables of the canonical implicit loss embedding: H = R^{|Y|},
// phi(y) = e_y, psi(z) = row z of the loss table.
struct CanonicalEmbedding {
  Eigen::MatrixXd psi;  // |Z| x |Y|
  double c_delta = 0.0;

  Eigen::VectorXd phi(LabelIndex y) const {
    return Eigen::VectorXd::Unit(psi.cols(), static_cast<Eigen::Index>(y));
  }
};

// Throws CapacityError when |Z| * |Y| exceeds max_entries.
CanonicalEmbedding canonical_embedding(const LossSpace& space,
                                       std::size_t max_entries = std::size_t{1} << 24);

inline double output_kernel_eval(const LossSpace& space, LabelIndex y, LabelIndex y2) {
  return space.output_kernel(y, y2);
}

// Index helpers for the built-in enumerations.
std::size_t subset_index(std::initializer_list<int> elements);
std::size_t ordinal_index(int value);
std::size_t sequence_index(int alphabet, const std::vector<int>& symbols);

}  // namespace osp
