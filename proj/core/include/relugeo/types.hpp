#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace relugeo {

// Dense row-major storage throughout; problems are desk-scale.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Activation { Relu, Tanh, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}
inline bool all_finite(const Mat& m) { return m.allFinite(); }
}  // namespace detail

/// n x p design matrix; row i is the i-th input sample.
class SampleMatrix {
 public:
  explicit SampleMatrix(Mat entries) : entries_(std::move(entries)) {
    detail::require(entries_.rows() >= 1 && entries_.cols() >= 1,
                    "SampleMatrix: need n >= 1, p >= 1");
    detail::require(detail::all_finite(entries_), "SampleMatrix: entries must be finite");
  }

  Index n() const { return entries_.rows(); }
  Index p() const { return entries_.cols(); }
  const Mat& entries() const { return entries_; }
  Eigen::RowVectorXd row(Index i) const { return entries_.row(i); }

  /// [S, 1]: the design matrix augmented with an all-ones column.
  Mat augmented() const {
    Mat a(entries_.rows(), entries_.cols() + 1);
    a.leftCols(entries_.cols()) = entries_;
    a.col(entries_.cols()).setOnes();
    return a;
  }

 private:
  Mat entries_;
};

/// n x q response matrix; row i pairs with sample row i.
class ResponseMatrix {
 public:
  explicit ResponseMatrix(Mat entries) : entries_(std::move(entries)) {
    detail::require(entries_.rows() >= 1 && entries_.cols() >= 1,
                    "ResponseMatrix: need n >= 1, q >= 1");
    detail::require(detail::all_finite(entries_), "ResponseMatrix: entries must be finite");
  }

  Index n() const { return entries_.rows(); }
  Index q() const { return entries_.cols(); }
  const Mat& entries() const { return entries_; }

 private:
  Mat entries_;
};

/// Architecture of a k-layer network: widths d_1..d_{k+1} and activation.
/// The final affine layer carries no activation.
class NetworkSpec {
 public:
  NetworkSpec(std::vector<Index> widths, Activation activation)
      : widths_(std::move(widths)), activation_(activation) {
    detail::require(widths_.size() >= 2, "NetworkSpec: need at least input and output widths");
    for (Index w : widths_) detail::require(w >= 1, "NetworkSpec: widths must be >= 1");
  }

  Index depth() const { return static_cast<Index>(widths_.size()) - 1; }
  Index input_dim() const { return widths_.front(); }
  Index output_dim() const { return widths_.back(); }
  Index width(Index layer) const { return widths_.at(static_cast<std::size_t>(layer)); }
  const std::vector<Index>& widths() const { return widths_; }
  Activation activation() const { return activation_; }

  /// Total parameter count m = sum_i (d_i + 1) d_{i+1}.
  Index parameter_count() const {
    Index m = 0;
    for (std::size_t i = 0; i + 1 < widths_.size(); ++i) m += (widths_[i] + 1) * widths_[i + 1];
    return m;
  }

 private:
  std::vector<Index> widths_;
  Activation activation_;
};

/// Per-layer affine weights (A_i, b_i).
class Weights {
 public:
  struct Layer {
    Mat A;
    Vec b;
  };

  Weights() = default;
  explicit Weights(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  /// Zero weights matching a spec.
  static Weights zeros(const NetworkSpec& spec) {
    std::vector<Layer> ls;
    for (Index i = 0; i < spec.depth(); ++i) {
      ls.push_back({Mat::Zero(spec.width(i + 1), spec.width(i)), Vec::Zero(spec.width(i + 1))});
    }
    return Weights(std::move(ls));
  }

  Index layer_count() const { return static_cast<Index>(layers_.size()); }
  const Layer& layer(Index i) const { return layers_.at(static_cast<std::size_t>(i)); }
  Layer& layer(Index i) { return layers_.at(static_cast<std::size_t>(i)); }
  const std::vector<Layer>& layers() const { return layers_; }

  bool matches(const NetworkSpec& spec) const {
    if (layer_count() != spec.depth()) return false;
    for (Index i = 0; i < spec.depth(); ++i) {
      if (layers_[static_cast<std::size_t>(i)].A.rows() != spec.width(i + 1) ||
          layers_[static_cast<std::size_t>(i)].A.cols() != spec.width(i) ||
          layers_[static_cast<std::size_t>(i)].b.size() != spec.width(i + 1))
        return false;
    }
    return true;
  }

  /// Flatten to a vector: per layer, A row-major then b.
  Vec flatten() const;
  /// Rebuild from a flat vector laid out as flatten() produces.
  static Weights unflatten(const NetworkSpec& spec, const Vec& v);

 private:
  std::vector<Layer> layers_;
};

}  // namespace relugeo
