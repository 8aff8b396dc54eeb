#pragma once

#include "betabern/normalizer.hpp"

#include <optional>
#include <sstream>

namespace bb {

struct Witness {
  std::vector<std::size_t> index;  // multi-index of the first differing row
  std::size_t column = 0;          // first differing chain column in that row
  std::vector<BigInt> left_row, right_row;
};

struct Verdict {
  bool equal = false;
  std::pair<NormalForm, NormalForm> normal_forms;
  std::optional<Witness> witness;
};

/// Derivable equality: the joined normal forms coincide.
inline Verdict decide(const Context& ctx, const Term& t, const Term& u) {
  Verdict v{false, join_normalize(ctx, t, u), std::nullopt};
  const auto& [a, b] = v.normal_forms;
  for (std::size_t f = 0; f < a.weights.size(); ++f) {
    if (a.weights[f] == b.weights[f]) continue;
    std::size_t col = 0;
    while (col < a.weights[f].size() && a.weights[f][col] == b.weights[f][col]) ++col;
    v.witness = Witness{multi_index(f, a.k, a.ell()), col, a.weights[f], b.weights[f]};
    return v;
  }
  v.equal = true;
  return v;
}

inline std::string to_text(const Verdict& v) {
  std::ostringstream os;
  const auto& [a, b] = v.normal_forms;
  os << (v.equal ? "equal" : "not equal") << "\n";
  os << "k = " << a.k << ", n = " << a.n << "\n";
  os << "chains:\n";
  for (std::size_t c = 0; c < a.chains.size(); ++c) os << "  c" << (c + 1) << " = " << to_string(a.ctx, a.chains[c]) << "\n";
  if (v.witness) {
    const auto& w = *v.witness;
    os << "witness: index " << detail::index_string(w.index) << ", chain c" << (w.column + 1) << "\n";
    os << "  left  ";
    for (const auto& x : w.left_row) os << " " << x;
    os << "\n  right ";
    for (const auto& x : w.right_row) os << " " << x;
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["equal"] = v.equal;
  j["left"] = to_json(v.normal_forms.first);
  j["right"] = to_json(v.normal_forms.second);
  if (v.witness) {
    nlohmann::json l = nlohmann::json::array(), r = nlohmann::json::array();
    for (const auto& x : v.witness->left_row) l.push_back(detail::int_json(x));
    for (const auto& x : v.witness->right_row) r.push_back(detail::int_json(x));
    j["witness"] = {{"index", v.witness->index}, {"column", v.witness->column}, {"left_row", l}, {"right_row", r}};
  }
  return j;
}

}  // namespace bb
