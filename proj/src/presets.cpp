#include "nilwalk/presets.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <regex>
#include <stdexcept>

namespace nilwalk {

LieAlgebra heisenberg() {
  LieAlgebra::BracketMap br;
  br[{0, 1}] = {{2, Rat(1)}};
  return LieAlgebra(3, {"e1", "e2", "e3"}, std::move(br));
}

LieAlgebra filiform3() {
  LieAlgebra::BracketMap br;
  br[{0, 1}] = {{2, Rat(1)}};
  br[{0, 2}] = {{3, Rat(1)}};
  return LieAlgebra(4, {"A", "T", "e3", "e4"}, std::move(br));
}

LieAlgebra unitriangular(int n) {
  if (n < 2) throw std::invalid_argument("unitriangular requires n >= 2");
  std::vector<std::pair<int, int>> pos;
  std::map<std::pair<int, int>, int> index;
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      index[{i, j}] = static_cast<int>(pos.size());
      pos.push_back({i, j});
      names.push_back("E" + std::to_string(i) + std::to_string(j));
    }
  LieAlgebra::BracketMap br;
  const int d = static_cast<int>(pos.size());
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      auto [i, j] = pos[a];
      auto [k, l] = pos[b];
      std::vector<std::pair<int, Rat>> coeffs;
      if (j == k) coeffs.push_back({index.at({i, l}), Rat(1)});
      if (i == l) coeffs.push_back({index.at({k, j}), Rat(-1)});
      if (!coeffs.empty()) br[{a, b}] = std::move(coeffs);
    }
  return LieAlgebra(d, std::move(names), std::move(br));
}

namespace {

// Hall-set construction for the free Lie algebra on `rank` generators.
struct HallElem {
  int left = -1, right = -1;  // children (basis indices), -1 for letters
  int letter = -1;
  int degree = 1;
};

class HallBasis {
 public:
  HallBasis(int rank, int step) : rank_(rank), step_(step) {
    for (int i = 0; i < rank; ++i) {
      HallElem e;
      e.letter = i;
      elems_.push_back(e);
    }
    by_degree_.assign(step + 1, {});
    for (int i = 0; i < rank; ++i) by_degree_[1].push_back(i);
    for (int d = 2; d <= step; ++d) {
      std::vector<int> fresh;
      for (int du = 1; du < d; ++du) {
        int dv = d - du;
        for (int u : by_degree_[du])
          for (int v : by_degree_[dv]) {
            if (!(cmp(u, v) < 0)) continue;
            if (elems_[v].letter < 0 && cmp(elems_[v].left, u) > 0) continue;
            HallElem e;
            e.left = u;
            e.right = v;
            e.degree = d;
            fresh.push_back(static_cast<int>(elems_.size()));
            elems_.push_back(e);
          }
      }
      std::sort(fresh.begin(), fresh.end(), [&](int a, int b) { return cmp(a, b) < 0; });
      by_degree_[d] = fresh;
    }
    // flatten in order; degrees are already sorted, fresh ids appended per degree
    for (int d = 1; d <= step; ++d)
      for (int id : by_degree_[d]) order_.push_back(id);
    rank_of_.assign(elems_.size(), -1);
    for (size_t i = 0; i < order_.size(); ++i) rank_of_[order_[i]] = static_cast<int>(i);
    for (size_t i = 0; i < order_.size(); ++i) {
      const HallElem& e = elems_[order_[i]];
      if (e.letter < 0) pair_index_[{rank_of_[e.left], rank_of_[e.right]}] = static_cast<int>(i);
    }
  }

  int dim() const { return static_cast<int>(order_.size()); }
  int degree(int b) const { return elems_[order_[b]].degree; }

  std::string name(int b) const {
    const HallElem& e = elems_[order_[b]];
    if (e.letter >= 0) return "x" + std::to_string(e.letter + 1);
    return "[" + name(rank_of_[e.left]) + "," + name(rank_of_[e.right]) + "]";
  }

  // [b_u, b_v] expanded over the basis, zero beyond the step.
  std::map<int, Rat> normal_form(int u, int v) {
    if (u == v) return {};
    auto it = memo_.find({u, v});
    if (it != memo_.end()) return it->second;
    std::map<int, Rat> out;
    if (degree(u) + degree(v) <= step_) {
      if (v < u) {
        for (auto& [k, c] : normal_form(v, u)) out[k] -= c;
      } else {
        const HallElem& ev = elems_[order_[v]];
        bool hall = ev.letter >= 0 || rank_of_[ev.left] <= u;
        if (hall) {
          out[pair_index_.at({u, v})] = 1;
        } else {
          // [u,[a,b]] = [[u,a],b] + [a,[u,b]]
          int a = rank_of_[ev.left], b = rank_of_[ev.right];
          for (auto& [w, c] : normal_form(u, a))
            for (auto& [k, c2] : normal_form(w, b)) out[k] += c * c2;
          for (auto& [w, c] : normal_form(u, b))
            for (auto& [k, c2] : normal_form(a, w)) out[k] += c * c2;
        }
      }
      for (auto it2 = out.begin(); it2 != out.end();)
        it2 = it2->second == 0 ? out.erase(it2) : std::next(it2);
    }
    memo_[{u, v}] = out;
    return out;
  }

 private:
  // degree first, then left factor, then right; letters by index
  int cmp(int a, int b) const {
    if (a == b) return 0;
    const HallElem &ea = elems_[a], &eb = elems_[b];
    if (ea.degree != eb.degree) return ea.degree < eb.degree ? -1 : 1;
    if (ea.letter >= 0 && eb.letter >= 0)
      return ea.letter < eb.letter ? -1 : (ea.letter == eb.letter ? 0 : 1);
    int c = cmp(ea.left, eb.left);
    if (c != 0) return c;
    return cmp(ea.right, eb.right);
  }

  int rank_, step_;
  std::vector<HallElem> elems_;
  std::vector<std::vector<int>> by_degree_;
  std::vector<int> order_;
  std::vector<int> rank_of_;
  std::map<std::pair<int, int>, int> pair_index_;
  std::map<std::pair<int, int>, std::map<int, Rat>> memo_;
};

}  // namespace

LieAlgebra build_free_nilpotent(int rank, int step) {
  if (rank < 1 || step < 1) throw std::invalid_argument("free algebra needs rank, step >= 1");
  if (step > BchTable::kMaxDegree)
    throw std::invalid_argument("free algebra step exceeds supported maximum");
  HallBasis hall(rank, step);
  if (hall.dim() > 64)
    throw std::invalid_argument("free algebra dimension " + std::to_string(hall.dim()) +
                                " exceeds the desk-scale limit of 64");
  LieAlgebra::BracketMap br;
  std::vector<std::string> names;
  for (int b = 0; b < hall.dim(); ++b) names.push_back(hall.name(b));
  for (int u = 0; u < hall.dim(); ++u)
    for (int v = u + 1; v < hall.dim(); ++v) {
      auto nf = hall.normal_form(u, v);
      if (nf.empty()) continue;
      std::vector<std::pair<int, Rat>> coeffs(nf.begin(), nf.end());
      br[{u, v}] = std::move(coeffs);
    }
  return LieAlgebra(hall.dim(), std::move(names), std::move(br));
}

LieAlgebra build_preset(const std::string& name) {
  if (name == "heisenberg") return heisenberg();
  if (name == "filiform3") return filiform3();
  std::smatch m;
  static const std::regex ut_re(R"(unitriangular\((\d+)\))");
  static const std::regex free_re(R"(free\((\d+),(\d+)\))");
  if (std::regex_match(name, m, ut_re)) return unitriangular(std::stoi(m[1]));
  if (std::regex_match(name, m, free_re))
    return build_free_nilpotent(std::stoi(m[1]), std::stoi(m[2]));
  throw std::invalid_argument("unknown preset: " + name);
}

LieAlgebra algebra_from_json(const nlohmann::json& j) {
  int dim = j.at("dim").get<int>();
  std::vector<std::string> names;
  if (j.contains("basis")) names = j.at("basis").get<std::vector<std::string>>();
  LieAlgebra::BracketMap br;
  for (const auto& entry : j.at("brackets")) {
    int i = entry.at(0).get<int>();
    int jj = entry.at(1).get<int>();
    std::vector<std::pair<int, Rat>> coeffs;
    for (const auto& kc : entry.at(2)) {
      int k = kc.at(0).get<int>();
      Rat c = kc.at(1).is_string() ? parse_rational(kc.at(1).get<std::string>())
                                   : parse_rational(kc.at(1).dump());
      coeffs.push_back({k, c});
    }
    if (i > jj) {
      for (auto& [k, c] : coeffs) c = -c;
      std::swap(i, jj);
    } else if (i == jj) {
      for (auto& [k, c] : coeffs)
        if (c != 0) throw std::invalid_argument("[e_i,e_i] must vanish");
      continue;
    }
    auto& slot = br[{i, jj}];
    if (!slot.empty()) throw std::invalid_argument("duplicate bracket entry");
    slot = std::move(coeffs);
  }
  LieAlgebra alg(dim, std::move(names), std::move(br));
  if (j.contains("step") && j.at("step").get<int>() != alg.step())
    throw std::invalid_argument("declared step does not match structure constants");
  return alg;
}

nlohmann::json algebra_to_json(const LieAlgebra& alg) {
  nlohmann::json j;
  j["dim"] = alg.dim();
  j["step"] = alg.step();
  j["basis"] = alg.basis_names();
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& [key, coeffs] : alg.brackets()) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, c] : coeffs) terms.push_back({k, rational_to_string(c)});
    brackets.push_back({key.first, key.second, terms});
  }
  j["brackets"] = brackets;
  return j;
}

}  // namespace nilwalk
