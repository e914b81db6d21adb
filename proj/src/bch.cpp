#include "nilwalk/bch.hpp"

#include <map>
#include <string>

namespace nilwalk {

namespace {

using Poly = std::map<std::string, Rat>;  // word over {'0','1'} -> coefficient

Poly mul(const Poly& a, const Poly& b, int maxdeg) {
  Poly r;
  for (const auto& [wa, ca] : a)
    for (const auto& [wb, cb] : b) {
      if (wa.size() + wb.size() > static_cast<size_t>(maxdeg)) continue;
      r[wa + wb] += ca * cb;
    }
  return r;
}

Poly exp_gen(char letter, int maxdeg) {
  Poly r;
  Rat fact = 1;
  std::string w;
  r[w] = 1;
  for (int k = 1; k <= maxdeg; ++k) {
    fact *= k;
    w += letter;
    r[w] = Rat(1) / fact;
  }
  return r;
}

}  // namespace

const BchTable& BchTable::instance() {
  static const BchTable table;
  return table;
}

BchTable::BchTable() {
  const int D = kMaxDegree;
  Poly u = mul(exp_gen('0', D), exp_gen('1', D), D);
  u.erase(std::string{});  // u = exp(x)exp(y) - 1, no constant term
  Poly z, upow = u;
  for (int k = 1; k <= D; ++k) {
    Rat c = Rat((k % 2) ? 1 : -1, k);
    for (const auto& [w, cw] : upow) z[w] += c * cw;
    if (k < D) upow = mul(upow, u, D);
  }

  // Suffix dag over all words of length <= D, sorted by length.
  std::map<std::string, int> node_of;
  std::vector<std::string> words;
  for (int len = 1; len <= D; ++len) {
    int count = 1 << len;
    for (int m = 0; m < count; ++m) {
      std::string w;
      for (int b = len - 1; b >= 0; --b) w += ((m >> b) & 1) ? '1' : '0';
      node_of[w] = static_cast<int>(words.size());
      words.push_back(w);
    }
    nodes_by_len_[len] = static_cast<int>(words.size());
  }
  nodes_.resize(words.size());
  for (size_t i = 0; i < words.size(); ++i) {
    const std::string& w = words[i];
    nodes_[i].letter = static_cast<uint8_t>(w[0] - '0');
    nodes_[i].len = static_cast<uint8_t>(w.size());
    nodes_[i].child = w.size() == 1 ? -1 : node_of.at(w.substr(1));
  }

  for (const auto& [w, cw] : z) {
    if (cw == 0) continue;
    Rat coeff = cw / Rat(static_cast<int>(w.size()));
    terms_.push_back({node_of.at(w), static_cast<int>(w.size()), coeff,
                      to_double(coeff)});
  }
}

int BchTable::num_nodes(int max_len) const {
  if (max_len <= 0) return 0;
  if (max_len > kMaxDegree) max_len = kMaxDegree;
  return nodes_by_len_[max_len];
}

}  // namespace nilwalk
