#include "stgc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stgc/errors.hpp"

namespace stgc {
namespace {

constexpr double kOffDiagonalThreshold = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();

  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == p || r == q) continue;
    const double arp = a(r, p);
    const double arq = a(r, q);
    a(r, p) = a(p, r) = c * arp - s * arq;
    a(r, q) = a(q, r) = s * arp + c * arq;
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double vrp = v(r, p);
    const double vrq = v(r, q);
    v(r, p) = c * vrp - s * vrq;
    v(r, q) = s * vrp + c * vrq;
  }
}

void require_rows(const SpectralDecomposition& decomp, const Matrix& m, const char* what) {
  if (m.rows() != decomp.size())
    throw DimensionError(std::string(what) + ": signal has " + std::to_string(m.rows()) +
                         " rows, decomposition has " + std::to_string(decomp.size()));
}

}  // namespace

SpectralDecomposition eigendecompose(const Matrix& symmetric, double tol) {
  const std::size_t n = symmetric.rows();
  if (n != symmetric.cols()) throw DimensionError("eigendecompose: matrix is not square");
  if (n > kMaxEigenSize)
    throw DimensionError("eigendecompose: size " + std::to_string(n) + " exceeds cap " +
                         std::to_string(kMaxEigenSize));
  if (!is_symmetric(symmetric)) throw DimensionError("eigendecompose: matrix is not symmetric");

  const double scale = std::max(1.0, frobenius_norm(symmetric));
  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);
  double off = off_diagonal_norm(a);
  int sweep = 0;
  while (off > kOffDiagonalThreshold * scale) {
    if (sweep == kMaxSweeps)
      throw ConvergenceError("eigendecompose: Jacobi sweep cap reached", off);
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
    off = off_diagonal_norm(a);
    ++sweep;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v(r, order[c]);
  }

  Matrix scaled = out.eigenvectors;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) scaled(r, c) *= out.eigenvalues[c];
  out.reconstruction_error = frobenius_norm(matmul(scaled, out.eigenvectors, false, true) - symmetric);
  const double orth_error =
      frobenius_norm(matmul(out.eigenvectors, out.eigenvectors, true, false) - Matrix::identity(n));
  if (out.reconstruction_error > tol * scale)
    throw ConvergenceError("eigendecompose: reconstruction check failed", out.reconstruction_error);
  if (orth_error > tol) throw ConvergenceError("eigendecompose: orthogonality check failed", orth_error);
  return out;
}

Matrix gft(const SpectralDecomposition& decomp, const Matrix& signal) {
  require_rows(decomp, signal, "gft");
  return matmul(decomp.eigenvectors, signal, true, false);
}

Matrix igft(const SpectralDecomposition& decomp, const Matrix& spectrum) {
  require_rows(decomp, spectrum, "igft");
  return matmul(decomp.eigenvectors, spectrum);
}

double psi_value(double lambda, std::size_t k) noexcept {
  double v = 1.0;
  for (std::size_t p = 0; p < k; ++p) v *= lambda;
  return v;
}

Matrix frequency_response(const SpectralDecomposition& decomp, std::span<const Matrix> mappings,
                          const Matrix& spectrum) {
  require_rows(decomp, spectrum, "frequency_response");
  if (mappings.empty()) throw DimensionError("frequency_response: no mappings");
  const std::size_t d_out = mappings.front().cols();
  Matrix out(spectrum.rows(), d_out);
  Matrix filtered(spectrum.rows(), spectrum.cols());
  for (std::size_t k = 0; k < mappings.size(); ++k) {
    const Matrix& vk = mappings[k];
    if (vk.rows() != spectrum.cols() || vk.cols() != d_out)
      throw DimensionError("frequency_response: mapping " + std::to_string(k) + " has wrong shape");
    for (std::size_t i = 0; i < spectrum.rows(); ++i) {
      const double g = psi_value(decomp.eigenvalues[i], k);
      for (std::size_t j = 0; j < spectrum.cols(); ++j) filtered(i, j) = g * spectrum(i, j);
    }
    gemm(filtered, false, vk, false, 1.0, 1.0, out);
  }
  return out;
}

Matrix frequency_response_indep(const SpectralDecomposition& decomp,
                                std::span<const Matrix> diagonals, const Matrix& spectrum) {
  require_rows(decomp, spectrum, "frequency_response_indep");
  Matrix out(spectrum.rows(), spectrum.cols());
  for (std::size_t k = 0; k < diagonals.size(); ++k) {
    const Matrix& vk = diagonals[k];
    if (vk.rows() != 1 || vk.cols() != spectrum.cols())
      throw DimensionError("frequency_response_indep: diagonal " + std::to_string(k) +
                           " has wrong length");
    for (std::size_t i = 0; i < spectrum.rows(); ++i) {
      const double g = psi_value(decomp.eigenvalues[i], k);
      for (std::size_t j = 0; j < spectrum.cols(); ++j) out(i, j) += vk(0, j) * g * spectrum(i, j);
    }
  }
  return out;
}

std::vector<double> polynomial_response(const SpectralDecomposition& decomp,
                                        std::span<const double> coefficients) {
  std::vector<double> h(decomp.size(), 0.0);
  for (std::size_t i = 0; i < decomp.size(); ++i)
    for (std::size_t k = 0; k < coefficients.size(); ++k)
      h[i] += coefficients[k] * psi_value(decomp.eigenvalues[i], k);
  return h;
}

RowScaling decompose_vk(const Matrix& mapping) {
  RowScaling out{std::vector<double>(mapping.rows(), 1.0), Matrix(mapping.rows(), mapping.cols())};
  for (std::size_t i = 0; i < mapping.rows(); ++i) {
    double norm = 0.0;
    for (double v : mapping.row(i)) norm = std::max(norm, std::abs(v));
    const double alpha = norm > 0.0 ? norm : 1.0;
    out.alpha[i] = alpha;
    for (std::size_t j = 0; j < mapping.cols(); ++j) {
      const double target = mapping(i, j);
      double q = target / alpha;
      if (q * alpha != target) {
        const double up = std::nextafter(q, HUGE_VAL);
        const double down = std::nextafter(q, -HUGE_VAL);
        if (up * alpha == target)
          q = up;
        else if (down * alpha == target)
          q = down;
      }
      out.normalized(i, j) = q;
    }
  }
  return out;
}

}  // namespace stgc
