#include "mendelboost/pedigree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <utility>

#include "mendelboost/error.hpp"

namespace mendelboost {

std::string_view to_string(Sex sex) { return sex == Sex::female ? "F" : "M"; }

Sex parse_sex(std::string_view text) {
  if (text == "F" || text == "f" || text == "female" || text == "0") return Sex::female;
  if (text == "M" || text == "m" || text == "male" || text == "1") return Sex::male;
  throw ParseError("unrecognised sex '" + std::string(text) + "'");
}

Pedigree::Pedigree(std::vector<Individual> members, std::string counselee_id,
                   std::vector<std::string> cancers)
    : members_(std::move(members)),
      counselee_id_(std::move(counselee_id)),
      cancers_(std::move(cancers)) {
  index_.reserve(members_.size());
  for (std::size_t i = 0; i < members_.size(); ++i) index_.emplace(members_[i].id, i);
  mother_.assign(members_.size(), kNoParent);
  father_.assign(members_.size(), kNoParent);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& m = members_[i];
    if (m.mother_id) {
      if (auto it = index_.find(*m.mother_id); it != index_.end()) mother_[i] = it->second;
    }
    if (m.father_id) {
      if (auto it = index_.find(*m.father_id); it != index_.end()) father_[i] = it->second;
    }
  }
}

std::optional<std::size_t> Pedigree::find(std::string_view id) const {
  if (auto it = index_.find(std::string(id)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Pedigree::counselee() const {
  auto idx = find(counselee_id_);
  if (!idx) throw InvalidArgument("counselee '" + counselee_id_ + "' is not a member");
  return *idx;
}

std::optional<std::size_t> Pedigree::cancer_index(std::string_view cancer) const {
  for (std::size_t r = 0; r < cancers_.size(); ++r)
    if (cancers_[r] == cancer) return r;
  return std::nullopt;
}

void Pedigree::require_valid() const {
  auto report = validate(*this);
  if (!report.ok()) {
    std::string msg = "invalid pedigree (counselee " + counselee_id_ + "):";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw InvalidArgument(msg);
  }
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t root(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // False when a and b were already connected.
  bool join(std::size_t a, std::size_t b) {
    a = root(a);
    b = root(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

bool parent_graph_acyclic(const Pedigree& p) {
  const std::size_t n = p.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t par : {p.mother_of(i), p.father_of(i)}) {
      if (par == kNoParent) continue;
      children[par].push_back(i);
      ++pending[i];
    }
  }
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push(i);
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto i = ready.front();
    ready.pop();
    ++seen;
    for (auto c : children[i])
      if (--pending[c] == 0) ready.push(c);
  }
  return seen == n;
}

}  // namespace

ValidationReport validate(const Pedigree& p) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  const auto& members = p.members();

  std::map<std::string, int> id_counts;
  for (const auto& m : members) ++id_counts[m.id];
  for (const auto& [id, count] : id_counts)
    if (count > 1) fail("duplicate id " + id);

  if (!p.find(p.counselee_id())) fail("counselee " + p.counselee_id() + " not in members");

  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    const std::string who = "member " + m.id + ": ";
    if (m.mother_id.has_value() != m.father_id.has_value())
      fail(who + "exactly one parent given");
    if (m.mother_id) {
      auto mi = p.mother_of(i);
      if (mi == kNoParent) {
        fail(who + "mother " + *m.mother_id + " not found");
      } else if (members[mi].sex != Sex::female) {
        fail(who + "mother not female");
      }
      if (*m.mother_id == m.id) fail(who + "is own mother");
    }
    if (m.father_id) {
      auto fi = p.father_of(i);
      if (fi == kNoParent) {
        fail(who + "father " + *m.father_id + " not found");
      } else if (members[fi].sex != Sex::male) {
        fail(who + "father not male");
      }
      if (*m.father_id == m.id) fail(who + "is own father");
    }
    if (m.current_age < 1 || m.current_age > kCensoredAge)
      fail(who + "current age " + std::to_string(m.current_age) + " outside [1, " +
           std::to_string(kCensoredAge) + "]");
    if (m.phenotypes.size() != p.cancers().size()) {
      fail(who + "phenotype count does not match cancer list");
      continue;
    }
    for (std::size_t r = 0; r < m.phenotypes.size(); ++r) {
      const auto& ph = m.phenotypes[r];
      const std::string what = who + p.cancers()[r] + ": ";
      if (ph.affected) {
        if (ph.observed_age < 1 || ph.observed_age > kMaxAge)
          fail(what + "affected with diagnosis age outside [1, " + std::to_string(kMaxAge) + "]");
        if (ph.observed_age > m.current_age) fail(what + "diagnosis after current age");
      } else if (ph.observed_age != 0 && ph.observed_age != m.current_age) {
        fail(what + "unaffected but observed age differs from current age");
      }
    }
  }

  if (!parent_graph_acyclic(p)) fail("parent-child graph has a cycle");
  if (!is_loop_free(p)) fail("pedigree contains a marriage loop");
  return report;
}

std::vector<std::size_t> founders(const Pedigree& p) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.members()[i].is_founder()) out.push_back(i);
  return out;
}

std::vector<NuclearFamily> nuclear_families(const Pedigree& p) {
  const auto& members = p.members();
  std::map<std::pair<std::string, std::string>, NuclearFamily> by_couple;
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto f = p.father_of(i);
    auto m = p.mother_of(i);
    if (f == kNoParent || m == kNoParent) continue;
    auto [it, inserted] = by_couple.try_emplace({members[f].id, members[m].id},
                                                NuclearFamily{f, m, {}});
    it->second.children.push_back(i);
  }
  std::vector<NuclearFamily> out;
  out.reserve(by_couple.size());
  for (auto& [key, fam] : by_couple) {
    std::sort(fam.children.begin(), fam.children.end(),
              [&](auto a, auto b) { return members[a].id < members[b].id; });
    out.push_back(std::move(fam));
  }
  return out;
}

bool is_loop_free(const Pedigree& p) {
  auto families = nuclear_families(p);
  DisjointSets sets(p.size() + families.size());
  for (std::size_t f = 0; f < families.size(); ++f) {
    const std::size_t node = p.size() + f;
    if (!sets.join(families[f].father, node)) return false;
    if (!sets.join(families[f].mother, node)) return false;
    for (auto c : families[f].children)
      if (!sets.join(c, node)) return false;
  }
  return true;
}

}  // namespace mendelboost
