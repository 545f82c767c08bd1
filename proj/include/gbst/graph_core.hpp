#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string_view>
#include <vector>

namespace gbst {

inline constexpr int kMinGraphSize = 2;
inline constexpr int kMaxGraphSize = 64;

// L1 puts the self-loop on vertex 0, L2 on vertex N-1.
enum class GraphFamily { L1, L2 };

std::string_view to_string(GraphFamily family);
GraphFamily parse_family(std::string_view text);

struct GraphParams {
  double edge_weight = 1.0;    // w_c
  double vertex_weight = 0.0;  // v_c
  GraphFamily family = GraphFamily::L1;

  // Throws InvalidParameter unless both weights are finite and nonnegative.
  void validate() const;
  bool positive_definite() const { return edge_weight > 0.0 && vertex_weight > 0.0; }
};

/// Generalized graph Laplacian L = D - A + V of a uniformly weighted line graph
/// carrying one self-loop at a boundary vertex.
///
/// Stored in tridiagonal form. Instances are only created through build(),
/// which validates the parameters once; every other operation trusts them.
class LineGraphLaplacian {
 public:
  static LineGraphLaplacian build(const GraphParams& params, int size);

  int size() const { return static_cast<int>(diagonal_.size()); }
  const std::vector<double>& diagonal() const { return diagonal_; }
  const std::vector<double>& off_diagonal() const { return off_diagonal_; }
  const GraphParams& params() const { return params_; }

  // Index of the vertex carrying the self-loop.
  int self_loop_vertex() const;

  // Divides every entry by the edge weight; throws DegenerateGraph if it is 0.
  LineGraphLaplacian normalized() const;

  Eigen::MatrixXd dense() const;

 private:
  LineGraphLaplacian(GraphParams params, std::vector<double> diagonal,
                     std::vector<double> off_diagonal)
      : params_(params), diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {}

  GraphParams params_;
  std::vector<double> diagonal_;
  std::vector<double> off_diagonal_;
};

// Throws InvalidDimension if size is outside [kMinGraphSize, kMaxGraphSize].
void check_graph_size(int size);

// Row-major text: one row per line, space-separated, 17 significant digits.
void write_matrix_text(std::ostream& out, const Eigen::MatrixXd& m);

}  // namespace gbst
