#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifim/corpus.hpp"
#include "ifim/format.hpp"
#include "ifim/profile.hpp"

// Batch kernels over whole corpora. Every kernel has a serial path that is
// the reference implementation and an OpenMP path that must produce
// identical, order-stable output.
namespace ifim::parallel {

enum class Exec { serial, parallel };

/// Threads the parallel path will use (1 without OpenMP).
int max_threads();

/// Span selection for every sample; sample i uses derive_seed(seed, i).
std::vector<corpus::FimTriplet> select_spans(const std::vector<corpus::CodeSample>& samples,
                                             std::uint64_t seed, Exec exec,
                                             int min_lines = 1, int max_lines = 3);

/// Per-sample contamination flags (1 = contaminated).
std::vector<char> contamination_flags(const std::vector<corpus::CodeSample>& samples,
                                      const std::vector<std::string>& contaminants, Exec exec);

corpus::DecontaminationResult decontaminate(const std::vector<corpus::CodeSample>& samples,
                                            const std::vector<std::string>& contaminants,
                                            Exec exec);

/// Renders every tagged record: ifim with `mode` (its default IFIM mode when
/// a base mode is given), plain_fim with the base mode, cfim through to_cfim
/// with the profile's comment marker for the record's language.
std::vector<format::TrainingExample> build_training_examples(
    const std::vector<corpus::TaggedRecord>& records, const format::Mode& mode,
    const ModelProfile& profile, Exec exec);

}  // namespace ifim::parallel
