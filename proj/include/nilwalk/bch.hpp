#pragma once

#include "nilwalk/rational.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace nilwalk {

// Campbell-Hausdorff series on two generators, precomputed once as a formal
// table up to degree 6 and evaluated against any algebra's structure
// constants. Terms come from the Dynkin-Specht-Wever projection: if c_w is
// the coefficient of the associative word w in log(exp(x)exp(y)), the Lie
// element is sum_w (c_w/|w|) [w_1,[w_2,[...,w_n]...]].
class BchTable {
 public:
  static constexpr int kMaxDegree = 6;

  struct Term {
    int node;       // suffix-dag node holding the right-normed bracket value
    int len;
    Rat coeff;
    double coeff_d;
  };

  // Node v of the dag evaluates to [letter, value(child)]; child < 0 means
  // the bare generator. Nodes are sorted by word length, children first.
  struct Node {
    uint8_t letter;  // 0 = left slot, 1 = right slot
    int child;
    uint8_t len;
  };

  static const BchTable& instance();

  const std::vector<Term>& terms() const { return terms_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int num_nodes(int max_len) const;  // nodes with len <= max_len

 private:
  BchTable();
  std::vector<Term> terms_;
  std::vector<Node> nodes_;
  std::array<int, kMaxDegree + 1> nodes_by_len_{};
};

}  // namespace nilwalk
