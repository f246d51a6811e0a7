#include "relugeo/network.hpp"

#include <cmath>

namespace relugeo {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw std::invalid_argument("unknown activation: " + name);
}

Vec Weights::flatten() const {
  Index total = 0;
  for (const auto& l : layers_) total += l.A.size() + l.b.size();
  Vec v(total);
  Index at = 0;
  for (const auto& l : layers_) {
    for (Index r = 0; r < l.A.rows(); ++r)
      for (Index c = 0; c < l.A.cols(); ++c) v[at++] = l.A(r, c);
    for (Index r = 0; r < l.b.size(); ++r) v[at++] = l.b[r];
  }
  return v;
}

Weights Weights::unflatten(const NetworkSpec& spec, const Vec& v) {
  detail::require(v.size() == spec.parameter_count(), "unflatten: length != parameter count");
  std::vector<Layer> ls;
  Index at = 0;
  for (Index i = 0; i < spec.depth(); ++i) {
    Mat A(spec.width(i + 1), spec.width(i));
    Vec b(spec.width(i + 1));
    for (Index r = 0; r < A.rows(); ++r)
      for (Index c = 0; c < A.cols(); ++c) A(r, c) = v[at++];
    for (Index r = 0; r < b.size(); ++r) b[r] = v[at++];
    ls.push_back({std::move(A), std::move(b)});
  }
  return Weights(std::move(ls));
}

Vec activate(Activation kind, const Vec& x) {
  switch (kind) {
    case Activation::Relu: return x.cwiseMax(0.0);
    case Activation::Tanh: return x.array().tanh().matrix();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  }
  return x;
}

Vec activate_deriv(Activation kind, const Vec& x) {
  switch (kind) {
    case Activation::Relu:
      return (x.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: {
      Eigen::ArrayXd t = x.array().tanh();
      return (1.0 - t * t).matrix();
    }
    case Activation::Sigmoid: {
      Eigen::ArrayXd s = 1.0 / (1.0 + (-x.array()).exp());
      return (s * (1.0 - s)).matrix();
    }
  }
  return Vec::Zero(x.size());
}

Vec forward(const NetworkSpec& spec, const Weights& w, const Vec& s) {
  detail::require(s.size() == spec.input_dim(), "forward: sample length != input dim");
  detail::require(w.matches(spec), "forward: weights do not match spec");
  Vec z = s;
  for (Index i = 0; i < spec.depth(); ++i) {
    Vec u = w.layer(i).A * z + w.layer(i).b;
    z = (i + 1 < spec.depth()) ? activate(spec.activation(), u) : u;
  }
  return z;
}

Mat weight_map(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S) {
  detail::require(S.p() == spec.input_dim(), "weight_map: sample width != input dim");
  Mat out(S.n(), spec.output_dim());
  for (Index i = 0; i < S.n(); ++i) out.row(i) = forward(spec, w, S.row(i).transpose()).transpose();
  return out;
}

double weight_norm(const Weights& w) {
  double sq = 0.0;
  for (const auto& l : w.layers()) sq += l.A.squaredNorm() + l.b.squaredNorm();
  return std::sqrt(sq);
}

namespace {

Mat jacobian_analytic(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S) {
  const Index k = spec.depth();
  const Index q = spec.output_dim();
  const Index m = spec.parameter_count();
  Mat J = Mat::Zero(S.n() * q, m);

  // Per-layer offsets into the flattened parameter vector.
  std::vector<Index> offs(static_cast<std::size_t>(k) + 1, 0);
  for (Index i = 0; i < k; ++i)
    offs[static_cast<std::size_t>(i) + 1] =
        offs[static_cast<std::size_t>(i)] + (spec.width(i) + 1) * spec.width(i + 1);

  for (Index si = 0; si < S.n(); ++si) {
    Vec z = S.row(si).transpose();
    std::vector<Vec> zs{z};   // post-activation per layer boundary
    std::vector<Vec> us;      // pre-activation per layer
    for (Index i = 0; i < k; ++i) {
      Vec u = w.layer(i).A * zs.back() + w.layer(i).b;
      us.push_back(u);
      if (i + 1 < k) {
        if (spec.activation() == Activation::Relu) {
          for (Index r = 0; r < u.size(); ++r)
            if (u[r] == 0.0) throw KinkTouchError(i, si, r);
        }
        zs.push_back(activate(spec.activation(), u));
      } else {
        zs.push_back(u);
      }
    }
    // Backward accumulation: M = d(output)/d(u_i), starting at the top layer.
    Mat M = Mat::Identity(q, q);
    for (Index i = k - 1; i >= 0; --i) {
      const Vec& zin = zs[static_cast<std::size_t>(i)];
      const Index din = spec.width(i), dout = spec.width(i + 1);
      Index base = offs[static_cast<std::size_t>(i)];
      for (Index oj = 0; oj < q; ++oj) {
        for (Index r = 0; r < dout; ++r) {
          for (Index c = 0; c < din; ++c)
            J(si * q + oj, base + r * din + c) += M(oj, r) * zin[c];
          J(si * q + oj, base + dout * din + r) += M(oj, r);
        }
      }
      if (i > 0) {
        Vec du = activate_deriv(spec.activation(), us[static_cast<std::size_t>(i) - 1]);
        Mat next = M * w.layer(i).A;
        for (Index col = 0; col < next.cols(); ++col) next.col(col) *= du[col];
        M = next;
      }
    }
  }
  return J;
}

Mat jacobian_fd(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S) {
  const Index q = spec.output_dim();
  const Index m = spec.parameter_count();
  Vec theta = w.flatten();
  Mat J(S.n() * q, m);
  for (Index j = 0; j < m; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(theta[j]));
    Vec tp = theta, tm = theta;
    tp[j] += h;
    tm[j] -= h;
    Mat yp = weight_map(spec, Weights::unflatten(spec, tp), S);
    Mat ym = weight_map(spec, Weights::unflatten(spec, tm), S);
    Mat diff = (yp - ym) / (2.0 * h);
    for (Index si = 0; si < S.n(); ++si)
      for (Index oj = 0; oj < q; ++oj) J(si * q + oj, j) = diff(si, oj);
  }
  return J;
}

}  // namespace

Mat jacobian(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S,
             JacobianMode mode) {
  detail::require(S.p() == spec.input_dim(), "jacobian: sample width != input dim");
  detail::require(w.matches(spec), "jacobian: weights do not match spec");
  return mode == JacobianMode::Analytic ? jacobian_analytic(spec, w, S)
                                        : jacobian_fd(spec, w, S);
}

}  // namespace relugeo
