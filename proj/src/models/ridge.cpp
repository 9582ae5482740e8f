#include <cmath>

#include "intimacy/common/error.hpp"
#include "intimacy/models.hpp"

namespace intimacy::models {

namespace {

void check_finite(const RidgeModel& m) {
  if (!m.weights.allFinite() || !std::isfinite(m.bias))
    throw Error("numerical_error", "ridge produced non-finite weights");
}

}  // namespace

RidgeModel train_ridge(const SparseMatrix& x, std::span<const double> y, double lambda) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw Error("dimension_mismatch", std::to_string(x.rows()) + " rows vs " +
                                          std::to_string(y.size()) + " targets");
  if (y.empty()) throw Error("dimension_mismatch", "no training rows");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error("invalid_argument", "lambda must be finite and >= 0");

  const Eigen::Index n = x.rows(), p = x.cols();
  const double nd = static_cast<double>(n);
  Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const double y_mean = yv.mean();
  const Eigen::VectorXd yc = yv.array() - y_mean;
  const Eigen::VectorXd mu = (x.transpose() * Eigen::VectorXd::Ones(n)) / nd;

  RidgeModel model;
  model.lambda = lambda;
  if (p == 0) {
    model.weights = Eigen::VectorXd::Zero(0);
    model.bias = y_mean;
    return model;
  }

  if (p <= n || lambda == 0.0) {
    // (Xc^T Xc + lambda I) w = Xc^T yc, with Xc^T Xc = X^T X - n mu mu^T.
    Eigen::MatrixXd gram = Eigen::MatrixXd(x.transpose() * x) - nd * mu * mu.transpose();
    gram.diagonal().array() += lambda;
    const Eigen::VectorXd rhs = x.transpose() * yc;
    if (lambda == 0.0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
      if (qr.rank() < p)
        throw Error("rank_deficient", "X has rank " + std::to_string(qr.rank()) + " < " +
                                          std::to_string(p) + " with lambda = 0");
      model.weights = qr.solve(rhs);
    } else {
      model.weights = gram.ldlt().solve(rhs);
    }
  } else {
    // Dual form: w = Xc^T a with (Xc Xc^T + lambda I) a = yc.
    const Eigen::VectorXd xmu = x * mu;
    Eigen::MatrixXd kernel = Eigen::MatrixXd(x * x.transpose());
    kernel.colwise() -= xmu;
    kernel.rowwise() -= xmu.transpose();
    kernel.array() += mu.squaredNorm();
    kernel.diagonal().array() += lambda;
    const Eigen::VectorXd a = kernel.ldlt().solve(yc);
    model.weights = x.transpose() * a - mu * a.sum();
  }
  model.bias = y_mean - mu.dot(model.weights);
  check_finite(model);
  return model;
}

RidgeModel train_ridge(const Eigen::MatrixXd& x, std::span<const double> y, double lambda) {
  SparseMatrix s = x.sparseView(0.0, 0.0);
  return train_ridge(s, y, lambda);
}

std::vector<double> predict_ridge(const RidgeModel& model, const SparseMatrix& x) {
  if (x.cols() != model.weights.size())
    throw Error("dimension_mismatch", "feature count " + std::to_string(x.cols()) +
                                          " vs model " + std::to_string(model.weights.size()));
  Eigen::VectorXd pred = x * model.weights;
  pred.array() += model.bias;
  return std::vector<double>(pred.data(), pred.data() + pred.size());
}

std::vector<double> predict_ridge(const RidgeModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.weights.size())
    throw Error("dimension_mismatch", "feature count " + std::to_string(x.cols()) +
                                          " vs model " + std::to_string(model.weights.size()));
  Eigen::VectorXd pred = x * model.weights;
  pred.array() += model.bias;
  return std::vector<double>(pred.data(), pred.data() + pred.size());
}

}  // namespace intimacy::models
