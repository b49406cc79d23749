#pragma once

#include <vector>

// Dense symmetric eigensolver: Householder tridiagonalization followed by
// implicit-shift QL. Sized for the small matrices of the critical-point
// machinery (k <= ~20); eigenvalues ascending.

namespace nir3 {

struct SymEigResult {
  std::vector<double> eigenvalues;   // ascending
  std::vector<double> eigenvectors;  // column i = eigenvector of eigenvalues[i], row-major n x n
};

// `a` is row-major n x n, symmetric (only the lower triangle is read).
SymEigResult sym_eig(const std::vector<double>& a, int n);

// Smallest eigenvalue only.
double sym_eig_min(const std::vector<double>& a, int n);

}  // namespace nir3
