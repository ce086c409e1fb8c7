#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vpr/evalstats.hpp"

namespace vpr::testing {

/// 18 questions for task 1 and 16 for task 2, split evenly over parts A and B.
inline stats::AnswerKey study_answer_key() {
  stats::AnswerKey key;
  auto add = [&](int task, int count) {
    for (int i = 0; i < count; ++i) {
      const char part = i < count / 2 ? 'A' : 'B';
      key["t" + std::to_string(task) + "q" + std::to_string(i + 1)] = {std::string(1, "abcd"[i % 4]), task, part};
    }
  };
  add(1, 18);
  add(2, 16);
  return key;
}

/// Answers every key question; `wrong` of them per task part get a wrong choice.
inline std::vector<stats::ResponseRecord> answer_sheet(const std::string& pid, stats::Prototype proto,
                                                       const stats::AnswerKey& key, int wrong, double time_sec) {
  std::vector<stats::ResponseRecord> out;
  std::map<std::pair<int, char>, int> missed;
  for (const auto& [qid, e] : key) {
    std::string answer = e.correct_answer;
    if (missed[{e.task, e.part}] < wrong) {
      answer = "z";
      ++missed[{e.task, e.part}];
    }
    out.push_back({pid, proto, e.task, e.part, qid, answer, time_sec});
  }
  return out;
}

struct StudyFiles {
  std::filesystem::path responses;
  std::filesystem::path answers;
  std::filesystem::path likert;
};

/// Small study over the first `prototypes` prototypes, 6 participants each,
/// with one fast responder in the first group.
inline StudyFiles write_study(const std::filesystem::path& dir, std::size_t prototypes, std::uint64_t seed = 1) {
  std::filesystem::create_directories(dir);
  const auto key = study_answer_key();
  StudyFiles files{dir / "responses.csv", dir / "answers.csv", dir / "likert.csv"};

  std::ofstream answers(files.answers);
  answers << "question_id,correct_answer,task,part\n";
  for (const auto& [qid, e] : key) answers << qid << "," << e.correct_answer << "," << e.task << "," << e.part << "\n";

  std::mt19937_64 rng(seed);
  std::ofstream responses(files.responses);
  std::ofstream likert(files.likert);
  responses << "participant_id,prototype,task,part,question_id,answer,time_sec\n";
  likert << "participant_id,prototype,question_id,rating\n";
  int pid = 0;
  for (std::size_t p = 0; p < prototypes; ++p) {
    const auto proto = stats::kAllPrototypes[p];
    for (int i = 0; i < 6; ++i) {
      const std::string id = "T" + std::to_string(++pid);
      const double time = (p == 0 && i == 0) ? 5.0 : 35.0 + static_cast<double>(rng() % 40);
      for (const auto& r : answer_sheet(id, proto, key, static_cast<int>(rng() % 4), time)) {
        responses << r.participant_id << "," << stats::to_string(r.prototype) << "," << r.task << "," << r.part << ","
                  << r.question_id << "," << r.answer << "," << r.time_sec << "\n";
      }
      for (int q = 1; q <= 3; ++q) {
        likert << id << "," << stats::to_string(proto) << ",Q" << q << "," << 1 + rng() % 5 << "\n";
      }
    }
  }
  return files;
}

/// Pooled two-sample t from group moments.
inline double pooled_t(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& xs) {
    double m = 0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::pair{m, ss};
  };
  const auto [ma, ssa] = moments(a);
  const auto [mb, ssb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sp2 = (ssa + ssb) / (na + nb - 2);
  return (mb - ma) / std::sqrt(sp2 * (1 / na + 1 / nb));
}

}  // namespace vpr::testing
