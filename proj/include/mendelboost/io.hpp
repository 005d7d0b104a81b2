#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mendelboost/mendelian.hpp"
#include "mendelboost/pedigree.hpp"
#include "mendelboost/penetrance.hpp"
#include "mendelboost/simulator.hpp"

namespace mendelboost {

// Splits one CSV line on commas. Quoted fields are not supported.
std::vector<std::string> split_csv_line(const std::string& line);

struct FamilyRecord {
  std::string family_id;
  Pedigree pedigree;
};

// Header: [family_id,]id,sex,mother_id,father_id,current_age,counselee,
// then affected_<cancer>,age_<cancer> per cancer. Empty parent ids mark
// founders; counselee is 1 for exactly one member per family. Without a
// family_id column the whole file is one family named "1".
std::vector<FamilyRecord> read_pedigrees(std::istream& in);
void write_pedigrees(std::ostream& out, const std::vector<FamilyRecord>& families);

// Rows of cancer,sex,carrier_key,age,density. A cancer listed for one sex
// only is restricted to that sex.
PenetranceSet read_penetrance(std::istream& in, const std::vector<std::string>& genes);
void write_penetrance(std::ostream& out, const PenetranceSet& tables);

// family_id,counselee_id,carrier,<gene states...>
void write_truth(std::ostream& out, const std::vector<std::string>& family_ids,
                 const std::vector<SimulatedFamily>& families, const GenotypeSpace& space);

struct TruthRecord {
  std::string family_id;
  int carrier = 0;
};
std::vector<TruthRecord> read_truth(std::istream& in);

// family_id,counselee_id,carrier_probability,log_likelihood. Predictions
// from other models use the same layout with log_likelihood left empty.
struct ScoreRecord {
  std::string family_id;
  std::string counselee_id;
  double carrier_probability = 0.0;
  std::optional<double> log_likelihood;
};
void write_scores(std::ostream& out, const std::vector<ScoreRecord>& scores);
std::vector<ScoreRecord> read_scores(std::istream& in);

}  // namespace mendelboost
