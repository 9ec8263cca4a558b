#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "logxlate/field_gen.hpp"
#include "logxlate/format.hpp"
#include "logxlate/record.hpp"
#include "logxlate/rng.hpp"

namespace logxlate {

enum class FormatSourceKind {
  Clf,        // fixed Common Log Format
  Elf,        // fixed Extended (combined) Log Format
  QuotedElf,  // an ELF line wrapped in one extra pair of literal quotes
  Random,     // fresh random format per record, k fields in [min,max]
};

struct MixEntry {
  FormatSourceKind source = FormatSourceKind::Elf;
  double proportion = 1.0;
  // Only used by Random sources.
  int min_fields = 2;
  int max_fields = 15;

  bool operator==(const MixEntry&) const = default;
};

struct DatasetProfile {
  std::string name;
  std::vector<MixEntry> mix;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

inline DatasetProfile tt_profile(std::size_t count = 2000, std::uint64_t seed = 1) {
  return {"TT", {{FormatSourceKind::Elf, 1.0}}, count, seed};
}

inline DatasetProfile te_profile(std::size_t count = 2000, std::uint64_t seed = 2) {
  return {"TE",
          {{FormatSourceKind::Elf, 0.40},
           {FormatSourceKind::Clf, 0.24},
           {FormatSourceKind::Random, 0.36, 2, 14}},
          count,
          seed};
}

inline DatasetProfile tm_profile(std::size_t count = 2000, std::uint64_t seed = 3) {
  return {"TM",
          {{FormatSourceKind::Clf, 0.50},
           {FormatSourceKind::Random, 0.50, 2, 14}},
          count,
          seed};
}

inline DatasetProfile tmp_profile(std::size_t count = 400, std::uint64_t seed = 4) {
  DatasetProfile p = tm_profile(count, seed);
  p.name = "TMp";
  return p;
}

inline DatasetProfile th_profile(std::size_t count = 2000, std::uint64_t seed = 5) {
  return {"TH", {{FormatSourceKind::Random, 1.0, 2, 15}}, count, seed};
}

inline DatasetProfile profile_by_name(const std::string& name,
                                      std::size_t count, std::uint64_t seed) {
  if (name == "TT" || name == "tt") return tt_profile(count, seed);
  if (name == "TE" || name == "te") return te_profile(count, seed);
  if (name == "TM" || name == "tm") return tm_profile(count, seed);
  if (name == "TMp" || name == "tmp") return tmp_profile(count, seed);
  if (name == "TH" || name == "th") return th_profile(count, seed);
  throw std::invalid_argument("unknown dataset profile: " + name);
}

inline void validate_profile(const DatasetProfile& profile) {
  if (profile.mix.empty()) {
    throw std::invalid_argument("dataset profile has an empty mix");
  }
  double total = 0.0;
  for (const MixEntry& entry : profile.mix) {
    if (entry.proportion < 0.0) {
      throw std::invalid_argument("mix proportion is negative");
    }
    if (entry.source == FormatSourceKind::Random &&
        !(2 <= entry.min_fields && entry.min_fields <= entry.max_fields &&
          entry.max_fields <= 15)) {
      throw std::invalid_argument("random mix entry needs 2 <= min <= max <= 15 fields");
    }
    total += entry.proportion;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mix proportions must sum to 1");
  }
}

// Splits `count` across the mix by largest remainder so per-source counts are
// exact for round proportions and off by at most one otherwise.
inline std::vector<std::size_t> apportion_counts(const DatasetProfile& profile) {
  const std::size_t n = profile.mix.size();
  std::vector<std::size_t> counts(n);
  std::vector<std::pair<double, std::size_t>> remainders(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = profile.mix[i].proportion * static_cast<double>(profile.count);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = {exact - std::floor(exact), i};
    assigned += counts[i];
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < profile.count; ++k, ++assigned) {
    counts[remainders[k % n].second] += 1;
  }
  return counts;
}

inline AnnotatedRecord generate_record(FormatSourceKind source, int min_fields,
                                       int max_fields, Rng& rng,
                                       const GeneratorOptions& opts = {}) {
  FormatSpec spec;
  switch (source) {
    case FormatSourceKind::Clf:
      spec = clf_format();
      break;
    case FormatSourceKind::Elf:
    case FormatSourceKind::QuotedElf:
      spec = elf_format();
      break;
    case FormatSourceKind::Random:
      spec = sample_format(rng, min_fields, max_fields);
      break;
  }
  AnnotatedRecord rec = render_record(spec, gen_record_values(spec, rng, opts));
  if (source == FormatSourceKind::QuotedElf) {
    rec.raw = '"' + rec.raw + '"';
    rec.ann = '"' + rec.ann + '"';
  }
  return rec;
}

// Generates profile.count aligned records. Which source each index draws from
// is decided up front (largest-remainder counts, then a seeded shuffle of the
// index->source labels); each record then derives its own rng stream from
// (profile.seed, index) so a record's bytes depend only on those two numbers
// and its assigned source.
inline std::vector<AnnotatedRecord> generate_dataset(
    const DatasetProfile& profile, const GeneratorOptions& opts = {}) {
  validate_profile(profile);
  const std::vector<std::size_t> counts = apportion_counts(profile);

  std::vector<std::uint32_t> labels;
  labels.reserve(profile.count);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    labels.insert(labels.end(), counts[i], static_cast<std::uint32_t>(i));
  }
  Rng label_rng(mix_seed(profile.seed, 0x6c6162656c /* "label" */));
  label_rng.shuffle(labels.begin(), labels.end());

  std::vector<AnnotatedRecord> records;
  records.reserve(profile.count);
  for (std::size_t i = 0; i < profile.count; ++i) {
    const MixEntry& entry = profile.mix[labels[i]];
    Rng rec_rng(mix_seed(profile.seed, i));
    records.push_back(generate_record(entry.source, entry.min_fields,
                                      entry.max_fields, rec_rng, opts));
  }
  return records;
}

}  // namespace logxlate
