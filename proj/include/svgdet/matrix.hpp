#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace svgdet {

// Minimal row-major dense matrix of doubles; exactly the operations the
// pipeline needs, nothing speculative.
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return a.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { a.assign(a.size(), v); }
    void add_scaled(const Matrix& o, double s);  // *this += s * o
    double frobenius_squared() const;
};

// C = A * B.  Shapes are checked; mismatch throws ShapeMismatch.
Matrix matmul(const Matrix& A, const Matrix& B);
// C = A^T * B
Matrix matmul_tn(const Matrix& A, const Matrix& B);
// C = A * B^T
Matrix matmul_nt(const Matrix& A, const Matrix& B);

Matrix relu(const Matrix& m);
// elementwise product of g with the ReLU mask of pre (1 where pre > 0)
Matrix relu_backward(const Matrix& g, const Matrix& pre);

// adds row vector b (1 x cols) to every row
void add_row_vector(Matrix& m, const Matrix& b);

std::vector<double> column_sums(const Matrix& m);
std::vector<double> row_mean(const Matrix& m);  // mean over rows -> cols-vector

bool all_finite(const Matrix& m);

}  // namespace svgdet
