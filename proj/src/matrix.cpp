#include "svgdet/matrix.hpp"

#include <cmath>

#include "svgdet/errors.hpp"

namespace svgdet {

void Matrix::add_scaled(const Matrix& o, double s) {
    if (!same_shape(o)) throw shape_mismatch("add_scaled shape mismatch");
    for (size_t i = 0; i < a.size(); ++i) a[i] += s * o.a[i];
}

double Matrix::frobenius_squared() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows)
        throw shape_mismatch("matmul: " + std::to_string(A.rows) + "x" + std::to_string(A.cols) +
                             " * " + std::to_string(B.rows) + "x" + std::to_string(B.cols));
    Matrix C(A.rows, B.cols);
    // i-k-j order keeps the inner loop contiguous for both C and B.
    for (int i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[static_cast<size_t>(i) * A.cols];
        double* crow = &C.a[static_cast<size_t>(i) * C.cols];
        for (int k = 0; k < A.cols; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;  // adjacency operands are mostly zero
            const double* brow = &B.a[static_cast<size_t>(k) * B.cols];
            for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

Matrix matmul_tn(const Matrix& A, const Matrix& B) {
    if (A.rows != B.rows) throw shape_mismatch("matmul_tn shape mismatch");
    Matrix C(A.cols, B.cols);
    for (int k = 0; k < A.rows; ++k) {
        const double* arow = &A.a[static_cast<size_t>(k) * A.cols];
        const double* brow = &B.a[static_cast<size_t>(k) * B.cols];
        for (int i = 0; i < A.cols; ++i) {
            double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = &C.a[static_cast<size_t>(i) * C.cols];
            for (int j = 0; j < B.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return C;
}

Matrix matmul_nt(const Matrix& A, const Matrix& B) {
    if (A.cols != B.cols) throw shape_mismatch("matmul_nt shape mismatch");
    Matrix C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[static_cast<size_t>(i) * A.cols];
        double* crow = &C.a[static_cast<size_t>(i) * C.cols];
        for (int j = 0; j < B.rows; ++j) {
            const double* brow = &B.a[static_cast<size_t>(j) * B.cols];
            double s = 0.0;
            for (int k = 0; k < A.cols; ++k) s += arow[k] * brow[k];
            crow[j] = s;
        }
    }
    return C;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.a)
        if (v < 0.0) v = 0.0;
    return out;
}

Matrix relu_backward(const Matrix& g, const Matrix& pre) {
    if (!g.same_shape(pre)) throw shape_mismatch("relu_backward shape mismatch");
    Matrix out = g;
    // subgradient at exactly zero is taken as zero
    for (size_t i = 0; i < out.a.size(); ++i)
        if (pre.a[i] <= 0.0) out.a[i] = 0.0;
    return out;
}

void add_row_vector(Matrix& m, const Matrix& b) {
    if (b.rows != 1 || b.cols != m.cols) throw shape_mismatch("add_row_vector shape mismatch");
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) += b(0, j);
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) s[j] += m(i, j);
    return s;
}

std::vector<double> row_mean(const Matrix& m) {
    std::vector<double> s = column_sums(m);
    for (double& v : s) v /= m.rows;
    return s;
}

bool all_finite(const Matrix& m) {
    for (double v : m.a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace svgdet
