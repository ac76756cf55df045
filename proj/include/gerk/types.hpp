#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gerk {

using Scalar = double;

// Node-major storage: row u of an embedding matrix is node u.
template <typename T>
using MatrixX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VectorX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using SparseX = Eigen::SparseMatrix<T, Eigen::RowMajor>;

using Matrix = MatrixX<Scalar>;
using Vector = VectorX<Scalar>;
using SparseMatrix = SparseX<Scalar>;

using NodeId = std::int32_t;
using ShardId = std::int32_t;
using Label = std::int32_t;

using NodeList = std::vector<NodeId>;
using LabelList = std::vector<Label>;

}  // namespace gerk
