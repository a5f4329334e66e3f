#include "ifim/parallel.hpp"

#include <exception>
#include <string_view>

#ifdef IFIM_HAVE_OPENMP
#include <omp.h>
#endif

#include "ifim/rng.hpp"

namespace ifim::parallel {

namespace {

// Runs body(i) for i in [0, n). Exceptions are caught per index and the one
// with the lowest index is rethrown, so both paths fail identically.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Exec::parallel) {
#ifdef IFIM_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int max_threads() {
#ifdef IFIM_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<corpus::FimTriplet> select_spans(const std::vector<corpus::CodeSample>& samples,
                                             std::uint64_t seed, Exec exec, int min_lines,
                                             int max_lines) {
  std::vector<corpus::FimTriplet> out(samples.size());
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    out[i] = corpus::select_middle_span(samples[i], derive_seed(seed, i), min_lines, max_lines);
  });
  return out;
}

std::vector<char> contamination_flags(const std::vector<corpus::CodeSample>& samples,
                                      const std::vector<std::string>& contaminants, Exec exec) {
  std::vector<std::string> needles;
  for (const auto& c : contaminants) {
    auto n = corpus::normalize_for_match(c);
    if (!n.empty()) needles.push_back(std::move(n));
  }
  std::vector<char> flags(samples.size(), 0);
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    const auto hay = corpus::normalize_for_match(samples[i].code);
    for (const auto& n : needles) {
      if (hay.find(n) != std::string::npos) {
        flags[i] = 1;
        break;
      }
    }
  });
  return flags;
}

corpus::DecontaminationResult decontaminate(const std::vector<corpus::CodeSample>& samples,
                                            const std::vector<std::string>& contaminants,
                                            Exec exec) {
  const auto flags = contamination_flags(samples, contaminants, exec);
  corpus::DecontaminationResult out;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (flags[i] ? out.removed : out.kept).push_back(samples[i]);
  return out;
}

std::vector<format::TrainingExample> build_training_examples(
    const std::vector<corpus::TaggedRecord>& records, const format::Mode& mode,
    const ModelProfile& profile, Exec exec) {
  std::vector<format::TrainingExample> out(records.size());
  for_each_index(records.size(), exec, [&](std::size_t i) {
    const auto& r = records[i];
    if (r.tag == corpus::Tag::cfim) {
      const auto triplet =
          corpus::to_cfim(r.record, profile.comment_marker(r.record.triplet.language));
      out[i] = format::build_training_example(triplet, mode, profile.sentinels, r.tag);
    } else {
      out[i] = format::build_training_example(r.record, mode, profile.sentinels, r.tag);
    }
  });
  return out;
}

}  // namespace ifim::parallel
