#include "mendelboost/io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mendelboost/error.hpp"

namespace mendelboost {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == '"') throw ParseError("quoted CSV fields are not supported");
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

namespace {

template <typename T>
T parse_number(const std::string& text, const std::string& what, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
  return value;
}

// Reads the header and yields data rows with their line numbers.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError("empty CSV input");
    header_ = split_csv_line(line);
    line_no_ = 1;
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t line() const { return line_no_; }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return i;
    throw ParseError("missing CSV column '" + name + "'");
  }

  bool next(std::vector<std::string>& row) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line == "\r") continue;
      row = split_csv_line(line);
      if (row.size() != header_.size())
        throw ParseError("line " + std::to_string(line_no_) + ": expected " +
                         std::to_string(header_.size()) + " fields, found " +
                         std::to_string(row.size()));
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

constexpr const char* kPedigreeColumns[] = {"id",          "sex",       "mother_id", "father_id",
                                            "current_age", "counselee"};

}  // namespace

std::vector<FamilyRecord> read_pedigrees(std::istream& in) {
  CsvReader csv(in);
  const auto& header = csv.header();
  const bool batched = !header.empty() && header[0] == "family_id";
  const std::size_t offset = batched ? 1 : 0;
  for (std::size_t i = 0; i < std::size(kPedigreeColumns); ++i)
    if (header.size() <= offset + i || header[offset + i] != kPedigreeColumns[i])
      throw ParseError(std::string("pedigree CSV: expected column '") + kPedigreeColumns[i] + "'");
  const std::size_t first_cancer = offset + std::size(kPedigreeColumns);
  if ((header.size() - first_cancer) % 2 != 0)
    throw ParseError("pedigree CSV: cancer columns must come in affected_/age_ pairs");
  std::vector<std::string> cancers;
  for (std::size_t c = first_cancer; c < header.size(); c += 2) {
    const std::string& a = header[c];
    const std::string& b = header[c + 1];
    if (a.rfind("affected_", 0) != 0 || b.rfind("age_", 0) != 0 || a.substr(9) != b.substr(4))
      throw ParseError("pedigree CSV: bad cancer columns '" + a + "', '" + b + "'");
    cancers.push_back(a.substr(9));
  }

  struct Pending {
    std::vector<Individual> members;
    std::vector<std::string> counselees;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> families;
  std::vector<std::string> row;
  while (csv.next(row)) {
    const std::size_t ln = csv.line();
    std::string fam = batched ? row[0] : "1";
    auto [it, inserted] = families.try_emplace(fam);
    if (inserted) order.push_back(fam);
    Individual ind;
    ind.id = row[offset];
    if (ind.id.empty()) throw ParseError("line " + std::to_string(ln) + ": empty id");
    try {
      ind.sex = parse_sex(row[offset + 1]);
    } catch (const Error& e) {
      throw ParseError("line " + std::to_string(ln) + ": " + e.what());
    }
    if (!row[offset + 2].empty()) ind.mother_id = row[offset + 2];
    if (!row[offset + 3].empty()) ind.father_id = row[offset + 3];
    ind.current_age = parse_number<int>(row[offset + 4], "current_age", ln);
    int counselee = parse_number<int>(row[offset + 5], "counselee flag", ln);
    if (counselee != 0 && counselee != 1)
      throw ParseError("line " + std::to_string(ln) + ": counselee flag must be 0 or 1");
    if (counselee) it->second.counselees.push_back(ind.id);
    for (std::size_t r = 0; r < cancers.size(); ++r) {
      PhenotypeRecord rec;
      int affected = parse_number<int>(row[first_cancer + 2 * r], "affected flag", ln);
      if (affected != 0 && affected != 1)
        throw ParseError("line " + std::to_string(ln) + ": affected flag must be 0 or 1");
      rec.affected = affected == 1;
      rec.observed_age = parse_number<int>(row[first_cancer + 2 * r + 1], "age", ln);
      ind.phenotypes.push_back(rec);
    }
    it->second.members.push_back(std::move(ind));
  }

  std::vector<FamilyRecord> out;
  for (const auto& fam : order) {
    auto& pending = families[fam];
    if (pending.counselees.size() != 1)
      throw ParseError("family " + fam + ": expected one counselee, found " +
                       std::to_string(pending.counselees.size()));
    out.push_back({fam, Pedigree(std::move(pending.members), pending.counselees[0], cancers)});
  }
  return out;
}

void write_pedigrees(std::ostream& out, const std::vector<FamilyRecord>& families) {
  if (families.empty()) throw InvalidArgument("no families to write");
  const auto& cancers = families.front().pedigree.cancers();
  out << "family_id";
  for (const char* c : kPedigreeColumns) out << ',' << c;
  for (const auto& c : cancers) out << ",affected_" << c << ",age_" << c;
  out << '\n';
  for (const auto& fam : families) {
    if (fam.pedigree.cancers() != cancers)
      throw InvalidArgument("families record different cancers");
    for (const auto& ind : fam.pedigree.members()) {
      out << fam.family_id << ',' << ind.id << ',' << to_string(ind.sex) << ','
          << ind.mother_id.value_or("") << ',' << ind.father_id.value_or("") << ','
          << ind.current_age << ',' << (ind.id == fam.pedigree.counselee_id() ? 1 : 0);
      for (const auto& rec : ind.phenotypes) out << ',' << (rec.affected ? 1 : 0) << ',' << rec.observed_age;
      out << '\n';
    }
  }
}

PenetranceSet read_penetrance(std::istream& in, const std::vector<std::string>& genes) {
  CsvReader csv(in);
  const std::size_t c_cancer = csv.column("cancer");
  const std::size_t c_sex = csv.column("sex");
  const std::size_t c_key = csv.column("carrier_key");
  const std::size_t c_age = csv.column("age");
  const std::size_t c_density = csv.column("density");

  std::vector<std::string> order;
  std::map<std::string, std::map<std::pair<Sex, std::string>, Density>> curves;
  std::vector<std::string> row;
  while (csv.next(row)) {
    const std::size_t ln = csv.line();
    const std::string& cancer = row[c_cancer];
    if (!curves.count(cancer)) order.push_back(cancer);
    Sex sex = parse_sex(row[c_sex]);
    int age = parse_number<int>(row[c_age], "age", ln);
    if (age < 1 || age > kMaxAge)
      throw ParseError("line " + std::to_string(ln) + ": age outside 1.." + std::to_string(kMaxAge));
    auto& density = curves[cancer][{sex, row[c_key]}];
    density.resize(kMaxAge, 0.0);
    density[static_cast<std::size_t>(age - 1)] = parse_number<double>(row[c_density], "density", ln);
  }

  std::vector<PenetranceTable> tables;
  for (const auto& cancer : order) {
    const auto& entries = curves[cancer];
    bool female = false, male = false;
    for (const auto& [key, _] : entries) (key.first == Sex::female ? female : male) = true;
    std::optional<Sex> restricted;
    if (female != male) restricted = female ? Sex::female : Sex::male;
    PenetranceTable table(cancer, restricted);
    for (const auto& [key, density] : entries) table.set_density(key.first, key.second, density);
    tables.push_back(std::move(table));
  }
  PenetranceSet set(GenotypeSpace(genes), std::move(tables));
  set.check_complete();
  return set;
}

void write_penetrance(std::ostream& out, const PenetranceSet& tables) {
  std::ostringstream os;
  os.precision(17);
  os << "cancer,sex,carrier_key,age,density\n";
  for (const auto& table : tables.tables())
    for (const auto& [key, density] : table.entries())
      for (std::size_t t = 0; t < density.size(); ++t)
        os << table.cancer() << ',' << to_string(key.first) << ',' << key.second << ',' << t + 1
           << ',' << density[t] << '\n';
  out << os.str();
}

void write_truth(std::ostream& out, const std::vector<std::string>& family_ids,
                 const std::vector<SimulatedFamily>& families, const GenotypeSpace& space) {
  if (family_ids.size() != families.size()) throw InvalidArgument("family id count mismatch");
  out << "family_id,counselee_id,carrier";
  for (const auto& g : space.genes()) out << ',' << g;
  out << '\n';
  for (std::size_t i = 0; i < families.size(); ++i) {
    const auto& f = families[i];
    Genotype g = f.counselee_genotype();
    out << family_ids[i] << ',' << f.pedigree.counselee_id() << ',' << (f.counselee_carrier() ? 1 : 0);
    for (std::size_t k = 0; k < space.n_genes(); ++k) out << ',' << space.state(g, k);
    out << '\n';
  }
}

std::vector<TruthRecord> read_truth(std::istream& in) {
  CsvReader csv(in);
  const std::size_t c_family = csv.column("family_id");
  const std::size_t c_carrier = csv.column("carrier");
  std::vector<TruthRecord> out;
  std::vector<std::string> row;
  while (csv.next(row)) {
    int carrier = parse_number<int>(row[c_carrier], "carrier flag", csv.line());
    if (carrier != 0 && carrier != 1)
      throw ParseError("line " + std::to_string(csv.line()) + ": carrier flag must be 0 or 1");
    out.push_back({row[c_family], carrier});
  }
  return out;
}

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& scores) {
  std::ostringstream os;
  os.precision(17);
  os << "family_id,counselee_id,carrier_probability,log_likelihood\n";
  for (const auto& s : scores) {
    os << s.family_id << ',' << s.counselee_id << ',' << s.carrier_probability << ',';
    if (s.log_likelihood) os << *s.log_likelihood;
    os << '\n';
  }
  out << os.str();
}

std::vector<ScoreRecord> read_scores(std::istream& in) {
  CsvReader csv(in);
  const std::size_t c_family = csv.column("family_id");
  const std::size_t c_prob = csv.column("carrier_probability");
  std::optional<std::size_t> c_counselee, c_loglik;
  for (std::size_t i = 0; i < csv.header().size(); ++i) {
    if (csv.header()[i] == "counselee_id") c_counselee = i;
    if (csv.header()[i] == "log_likelihood") c_loglik = i;
  }
  std::vector<ScoreRecord> out;
  std::vector<std::string> row;
  while (csv.next(row)) {
    ScoreRecord rec;
    rec.family_id = row[c_family];
    if (c_counselee) rec.counselee_id = row[*c_counselee];
    rec.carrier_probability = parse_number<double>(row[c_prob], "probability", csv.line());
    if (rec.carrier_probability < 0.0 || rec.carrier_probability > 1.0)
      throw ParseError("line " + std::to_string(csv.line()) + ": probability outside [0, 1]");
    if (c_loglik && !row[*c_loglik].empty())
      rec.log_likelihood = parse_number<double>(row[*c_loglik], "log likelihood", csv.line());
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace mendelboost
