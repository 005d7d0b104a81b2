#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mendelboost {

// Discrete age grid. Events happen at ages 1..kMaxAge; kCensoredAge encodes
// "no event within range" and "survived the full age range".
inline constexpr int kMaxAge = 94;
inline constexpr int kCensoredAge = kMaxAge + 1;

enum class Sex { female, male };

std::string_view to_string(Sex sex);
Sex parse_sex(std::string_view text);

// Observed status for one cancer. observed_age == 0 together with
// affected == false means "no information".
struct PhenotypeRecord {
  bool affected = false;
  int observed_age = 0;

  bool unknown() const { return !affected && observed_age == 0; }
  friend bool operator==(const PhenotypeRecord&, const PhenotypeRecord&) = default;
};

struct Individual {
  std::string id;
  Sex sex = Sex::female;
  std::optional<std::string> mother_id;
  std::optional<std::string> father_id;
  int current_age = 1;
  // Aligned with Pedigree::cancers().
  std::vector<PhenotypeRecord> phenotypes;

  bool is_founder() const { return !mother_id && !father_id; }
  friend bool operator==(const Individual&, const Individual&) = default;
};

struct NuclearFamily {
  std::size_t father;
  std::size_t mother;
  std::vector<std::size_t> children;  // sorted by member id
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

// A family with a designated counselee. Holds possibly-invalid data so that
// validate() can report on it; algorithms that need structure call
// require_valid() first.
class Pedigree {
 public:
  Pedigree() = default;
  Pedigree(std::vector<Individual> members, std::string counselee_id,
           std::vector<std::string> cancers);

  const std::vector<Individual>& members() const { return members_; }
  const std::vector<std::string>& cancers() const { return cancers_; }
  const std::string& counselee_id() const { return counselee_id_; }
  std::size_t size() const { return members_.size(); }

  // Member index by id, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t counselee() const;
  // Column of a cancer in the phenotype vectors, or nullopt.
  std::optional<std::size_t> cancer_index(std::string_view cancer) const;

  // Resolved parent indices (kNoParent for founders or dangling references).
  std::size_t mother_of(std::size_t i) const { return mother_[i]; }
  std::size_t father_of(std::size_t i) const { return father_[i]; }

  void require_valid() const;

 private:
  std::vector<Individual> members_;
  std::string counselee_id_;
  std::vector<std::string> cancers_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> mother_;
  std::vector<std::size_t> father_;
};

ValidationReport validate(const Pedigree& pedigree);

std::vector<std::size_t> founders(const Pedigree& pedigree);

// One entry per couple with children, ordered by (father id, mother id).
std::vector<NuclearFamily> nuclear_families(const Pedigree& pedigree);

// True when the individual/marriage bipartite graph has no cycle.
bool is_loop_free(const Pedigree& pedigree);

}  // namespace mendelboost
