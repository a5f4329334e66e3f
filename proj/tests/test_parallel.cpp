#include <doctest.h>

#include <random>

#include "ifim/corpus.hpp"
#include "ifim/error.hpp"
#include "ifim/parallel.hpp"
#include "ifim/rng.hpp"
#include "test_util.hpp"

using namespace ifim;
using parallel::Exec;

namespace {

std::vector<corpus::CodeSample> random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<corpus::CodeSample> v;
  for (std::size_t i = 0; i < n; ++i)
    v.push_back({"s" + std::to_string(i), i % 3 ? "python" : "cpp", testing::random_source(g, 25), ""});
  return v;
}

bool same(const corpus::DecontaminationResult& a, const corpus::DecontaminationResult& b) {
  auto ids = [](const std::vector<corpus::CodeSample>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.id);
    return out;
  };
  return ids(a.kept) == ids(b.kept) && ids(a.removed) == ids(b.removed);
}

}  // namespace

TEST_CASE("span selection: parallel equals serial and the per-sample reference") {
  const auto samples = random_samples(3000, 11);
  const auto serial = parallel::select_spans(samples, 99, Exec::serial);
  const auto par = parallel::select_spans(samples, 99, Exec::parallel);
  REQUIRE(serial.size() == samples.size());
  CHECK(serial == par);
  for (std::size_t i = 0; i < samples.size(); i += 97)
    CHECK(serial[i] == corpus::select_middle_span(samples[i], derive_seed(99, i)));
  CHECK(parallel::select_spans(samples, 100, Exec::parallel) != serial);
}

TEST_CASE("decontamination: parallel equals serial and the corpus reference") {
  auto samples = random_samples(2000, 12);
  std::vector<std::string> contaminants = {"xabc", samples[5].code, "XDEF = ", "# only a comment"};
  const auto serial = parallel::decontaminate(samples, contaminants, Exec::serial);
  const auto par = parallel::decontaminate(samples, contaminants, Exec::parallel);
  CHECK(same(serial, par));
  CHECK(same(serial, corpus::decontaminate(samples, contaminants)));
  CHECK(serial.removed.size() >= 1);
  const auto flags = parallel::contamination_flags(samples, contaminants, Exec::parallel);
  CHECK(flags == parallel::contamination_flags(samples, contaminants, Exec::serial));
  CHECK(flags[5] == 1);
}

TEST_CASE("training examples: parallel equals serial") {
  const auto samples = random_samples(1500, 13);
  const auto triplets = parallel::select_spans(samples, 5, Exec::serial);
  std::vector<corpus::TaggedRecord> records;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    corpus::TaggedRecord r;
    r.record.triplet = triplets[i];
    r.record.instruction = "Do step " + std::to_string(i) + ".";
    r.tag = static_cast<corpus::Tag>(i % 3);
    records.push_back(r);
  }
  const auto profile = default_profile();
  for (const format::Mode mode : {format::Mode{format::BaseMode::PSM}, format::Mode{format::BaseMode::SPM},
                                  format::Mode{format::IfimMode{format::BaseMode::PMS, 3}}}) {
    const auto serial = parallel::build_training_examples(records, mode, profile, Exec::serial);
    const auto par = parallel::build_training_examples(records, mode, profile, Exec::parallel);
    REQUIRE(serial.size() == par.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].record_id == par[i].record_id);
      CHECK(serial[i].input == par[i].input);
      CHECK(serial[i].input_after == par[i].input_after);
      CHECK(serial[i].target == par[i].target);
    }
    // cfim rows carry the instruction as a comment.
    CHECK(serial[2].input.find("# Do step 2.") != std::string::npos);
    CHECK(serial[1].input.find("<INS>") == std::string::npos);
  }
}

TEST_CASE("errors surface from the lowest failing index on both paths") {
  auto samples = random_samples(500, 14);
  samples[123].code = "   \n";
  samples[400].code = "\n";
  for (auto exec : {Exec::serial, Exec::parallel}) {
    try {
      parallel::select_spans(samples, 1, exec);
      FAIL("expected an error");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("s123") != std::string::npos);
    }
  }
}

TEST_CASE("thread count") { CHECK(parallel::max_threads() >= 1); }
