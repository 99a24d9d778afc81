#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/analytics_fixtures.hpp"
#include "../support/stats_oracle.hpp"
#include "mindless/analytics/episodes.hpp"
#include "mindless/analytics/hypothesis_tests.hpp"
#include "mindless/analytics/intervals.hpp"
#include "mindless/analytics/report.hpp"
#include "mindless/analytics/special_functions.hpp"
#include "mindless/error.hpp"

using namespace mindless::analytics;
using mindless::sched::EventKind;
using mindless::sched::SessionLog;

namespace {

std::vector<double> random_group(std::mt19937_64& rng, std::size_t n, double mu, double sigma) {
  std::normal_distribution<double> d(mu, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

IntervalTrack track(std::vector<Interval> iv) {
  return IntervalTrack::from_intervals(LabelSource::Annotation, std::move(iv));
}

constexpr auto A = AttentionState::Attentive;
constexpr auto D = AttentionState::Distracted;

} // namespace

TEST_CASE("special functions at closed-form points") {
  CHECK(regularized_beta(3.0, 3.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(regularized_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(regularized_beta(2.0, 1.0, 0.4) == doctest::Approx(0.16).epsilon(1e-12));
  for (double x : {0.1, 1.0, 2.5, 9.0})
    CHECK(regularized_gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-12));
  CHECK(regularized_gamma_p(2.5, 3.0) + regularized_gamma_q(2.5, 3.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(chi_square_sf(0.0, 3.0) == 1.0);
  CHECK(f_sf(0.0, 2.0, 10.0) == 1.0);
  CHECK(student_t_two_sided_p(0.0, 7.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(regularized_beta(0.0, 1.0, 0.5), mindless::InvalidArgument);
}

TEST_CASE("p-value functions agree with quadrature") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> stat(0.05, 6.0), dfd(1.0, 60.0);
  for (int i = 0; i < 10; ++i) {
    const double x = stat(rng), df = std::round(dfd(rng)), df2 = std::round(dfd(rng));
    CHECK(std::abs(student_t_two_sided_p(x, df) - oracle::t_two_sided_p(x, df)) < 1e-6);
    CHECK(std::abs(chi_square_sf(x * x, df) - oracle::chi_square_sf(x * x, df)) < 1e-6);
    CHECK(std::abs(f_sf(x, df, df2) - oracle::f_sf(x, df, df2)) < 1e-6);
  }
}

TEST_CASE("unpaired t: hand example and null case") {
  const std::vector<double> a{3, 4, 5}, b{1, 2, 3};
  const auto r = unpaired_t_test(a, b);
  CHECK(r.effect_size == doctest::Approx(2.0));
  CHECK(r.statistic == doctest::Approx(2.449489742783178));
  CHECK(r.df1 == 4.0);
  CHECK(r.p_value == doctest::Approx(0.0705).epsilon(1e-3));

  const auto same = unpaired_t_test(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == doctest::Approx(1.0));
  CHECK_THROWS_AS(unpaired_t_test(std::vector<double>{1.0}, b), mindless::InsufficientData);
}

TEST_CASE("unpaired t matches the textbook oracle") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    const auto a = random_group(rng, 5 + i, 10.0, 3.0);
    const auto b = random_group(rng, 4 + 2 * i, 12.0, 4.0);
    const auto r = unpaired_t_test(a, b);
    const auto o = oracle::pooled_t(a, b);
    CHECK(std::abs(r.statistic - o.t) < 1e-9);
    CHECK(r.df1 == o.df);
    CHECK(std::abs(r.p_value - o.p) < 1e-6);
    CHECK(std::abs(r.effect_size - o.d) < 1e-9);
  }
}

TEST_CASE("t antisymmetry and d scale invariance") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    auto a = random_group(rng, 8, 0.0, 1.0), b = random_group(rng, 9, 0.5, 2.0);
    const auto ab = unpaired_t_test(a, b), ba = unpaired_t_test(b, a);
    CHECK(ab.statistic == doctest::Approx(-ba.statistic));
    CHECK(ab.p_value == doctest::Approx(ba.p_value));
    for (auto& x : a) x *= 3.7;
    for (auto& x : b) x *= 3.7;
    CHECK(unpaired_t_test(a, b).effect_size == doctest::Approx(ab.effect_size));
  }
}

TEST_CASE("paired t") {
  const std::vector<double> v{1.5, 2.0, 4.0, 3.3};
  const auto same = paired_t_test(v, v);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  CHECK_THROWS_AS(paired_t_test(v, std::vector<double>{1, 2}), mindless::InvalidArgument);

  std::vector<double> shifted = v;
  for (auto& x : shifted) x += 2.0;
  const auto inf = paired_t_test(v, shifted);
  CHECK(inf.infinite);
  CHECK(std::isinf(inf.statistic));
  CHECK(inf.statistic > 0);
  CHECK(inf.p_value == 0.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto before = random_group(rng, 6 + i, 50.0, 10.0);
    auto after = before;
    const auto noise = random_group(rng, after.size(), 4.0, 3.0);
    for (std::size_t k = 0; k < after.size(); ++k) after[k] += noise[k];
    const auto r = paired_t_test(before, after);
    const auto o = oracle::paired_t(before, after);
    CHECK(std::abs(r.statistic - o.t) < 1e-9);
    CHECK(std::abs(r.effect_size - o.d) < 1e-9);
    CHECK(std::abs(r.p_value - o.p) < 1e-6);
  }
}

TEST_CASE("chi-square on the pattern table") {
  const auto a = pattern_attribution({19, 7, 14, 16}, {50, 47, 50, 55});
  CHECK(a.test.statistic == doctest::Approx(3.83888).epsilon(1e-5));
  CHECK(a.test.df1 == 3.0);
  CHECK(std::abs(a.test.p_value - 0.2794) < 1e-3);
  CHECK(std::abs(a.test.effect_size - 0.1220) < 5e-4);
}

TEST_CASE("chi-square properties and oracle") {
  const auto prop = chi_square_contingency({{2, 4, 6}, {5, 10, 15}});
  CHECK(prop.statistic == doctest::Approx(0.0).scale(1));
  CHECK(prop.effect_size == doctest::Approx(0.0).scale(1));

  const Table t{{12, 5, 9}, {3, 14, 8}, {6, 6, 11}};
  const Table swapped{t[2], t[0], t[1]};
  CHECK(chi_square_contingency(t).statistic == doctest::Approx(chi_square_contingency(swapped).statistic));

  CHECK_THROWS_AS(chi_square_contingency({{0, 0}, {1, 2}}), mindless::DegenerateInput);
  CHECK_THROWS_AS(chi_square_contingency({{1, 2}}), mindless::DegenerateInput);

  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> count(1, 40), dim(2, 4);
  for (int i = 0; i < 10; ++i) {
    Table tab(dim(rng), std::vector<double>(dim(rng)));
    for (auto& row : tab)
      for (auto& x : row) x = count(rng);
    const auto r = chi_square_contingency(tab);
    const auto o = oracle::chi_square(tab);
    CHECK(std::abs(r.statistic - o.chi2) < 1e-9);
    CHECK(r.df1 == o.df);
    CHECK(std::abs(r.p_value - o.p) < 1e-6);
    CHECK(std::abs(r.effect_size - o.v) < 1e-9);
  }
}

TEST_CASE("one-way ANOVA") {
  const std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  const auto null = one_way_anova(same);
  CHECK(null.omnibus.statistic == 0.0);
  CHECK(null.omnibus.effect_size == 0.0);
  CHECK(null.omnibus.p_value == 1.0);

  const std::vector<std::vector<double>> one{{1, 2, 3}};
  CHECK_THROWS_AS(one_way_anova(one), mindless::InsufficientData);

  const double f = 8.5773, df1 = 2, df2 = 57;
  CHECK(std::abs(f * df1 / (f * df1 + df2) - 0.2313) < 1e-4);

  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i) {
    std::vector<std::vector<double>> groups;
    for (int g = 0; g < 3 + i % 2; ++g) groups.push_back(random_group(rng, 5 + (i + g) % 6, g * 1.5, 2.0));
    const auto r = one_way_anova(groups);
    const auto o = oracle::anova(groups);
    CHECK(std::abs(r.omnibus.statistic - o.f) < 1e-9);
    CHECK(r.omnibus.df1 == o.df1);
    CHECK(r.omnibus.df2 == o.df2);
    CHECK(std::abs(r.omnibus.p_value - o.p) < 1e-6);
    CHECK(std::abs(r.omnibus.effect_size - o.eta2) < 1e-9);
    const double k = r.omnibus.statistic * r.omnibus.df1;
    CHECK(r.omnibus.effect_size == doctest::Approx(k / (k + r.omnibus.df2)).epsilon(1e-12));
    CHECK(r.omnibus.effect_size >= 0.0);
    CHECK(r.omnibus.effect_size <= 1.0);
    const std::size_t pairs = groups.size() * (groups.size() - 1) / 2;
    REQUIRE(r.post_hoc.size() == pairs);
    for (const auto& c : r.post_hoc) {
      CHECK(c.p_adjusted == doctest::Approx(std::min(1.0, c.test.p_value * pairs)));
      CHECK(c.test.effect_size == doctest::Approx(oracle::pooled_t(groups[c.first], groups[c.second]).d));
    }
  }
}

TEST_CASE("distracted time and count") {
  const auto t = track({{0, 10, A}, {10, 20, D}, {20, 30, A}, {30, 45, D}, {45, 600, A}});
  CHECK(total_distracted_time(t) == doctest::Approx(25.0));
  CHECK(distraction_count(t) == 2);

  const auto calm = track({{0, 600, A}});
  CHECK(total_distracted_time(calm) == 0.0);
  CHECK(distraction_count(calm) == 0);

  const auto lost = track({{0, 600, D}});
  CHECK(total_distracted_time(lost) == 600.0);
  CHECK(distraction_count(lost) == 1);
}

TEST_CASE("tracks from marks clip and merge") {
  const std::vector<StateMark> marks{{-5, D}, {10, D}, {20, A}, {700, D}};
  const auto t = IntervalTrack::from_marks(LabelSource::Annotation, 0, 600, A, marks);
  REQUIRE(t.intervals().size() == 2);
  CHECK(t.intervals()[0] == Interval{0, 20, D});
  CHECK(t.intervals()[1] == Interval{20, 600, A});
  const auto s = t.slice(15, 100);
  CHECK(total_distracted_time(s) == doctest::Approx(5.0));
  CHECK_THROWS_AS(track({{0, 10, A}, {11, 20, D}}), mindless::InvalidArgument);
}

TEST_CASE("confusion matrix") {
  const auto ann = track({{0, 60, A}, {60, 120, D}, {120, 300, A}});
  auto same = confusion_matrix(ann, ann);
  CHECK(same.attentive_distracted == 0.0);
  CHECK(same.distracted_attentive == 0.0);
  CHECK(same.accuracy() == 1.0);

  const auto inv = track({{0, 60, D}, {60, 120, A}, {120, 300, D}});
  const auto flipped = confusion_matrix(ann, inv);
  CHECK(flipped.attentive_attentive == 0.0);
  CHECK(flipped.distracted_distracted == 0.0);
  CHECK(flipped.accuracy() == 0.0);
  CHECK(flipped.total() == doctest::Approx(5.0));

  CHECK_THROWS_AS(confusion_matrix(ann, track({{0, 200, A}})), mindless::DataError);
}

TEST_CASE("confusion matrix on the reference cells") {
  const auto pair = fixture::track_pair({435.4, 78.0, 51.4, 70.7});
  const auto m = confusion_matrix(pair.annotation, pair.detection);
  CHECK(m.attentive_attentive == doctest::Approx(435.4));
  CHECK(m.attentive_distracted == doctest::Approx(78.0));
  CHECK(m.distracted_attentive == doctest::Approx(51.4));
  CHECK(m.distracted_distracted == doctest::Approx(70.7));
  CHECK(std::abs(m.accuracy() * 100 - 79.6) < 0.1);
  CHECK(std::abs(m.precision() * 100 - 47.6) < 0.1);
}

TEST_CASE("confusion cells sum to span and ratios survive rescaling") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> len(1.0, 40.0);
  std::bernoulli_distribution coin(0.4);
  for (int i = 0; i < 20; ++i) {
    auto random_track = [&](double end) {
      std::vector<StateMark> marks;
      for (double t = len(rng); t < end; t += len(rng)) marks.push_back({t, coin(rng) ? D : A});
      return IntervalTrack::from_marks(LabelSource::Detection, 0, end, A, marks);
    };
    const auto a = random_track(900), d = random_track(900);
    const auto m = confusion_matrix(a, d);
    CHECK(m.total() == doctest::Approx(15.0));
    const auto scaled = confusion_matrix(a.scaled(2.5), d.scaled(2.5));
    CHECK(scaled.accuracy() == doctest::Approx(m.accuracy()));
    CHECK(scaled.precision() == doctest::Approx(m.precision()));
  }
}

TEST_CASE("track file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "mindless_track.detections.jsonl";
  const auto t = track({{0, 12.5, A}, {12.5, 20.25, D}, {20.25, 60, A}});
  write_track(path, t);
  const auto back = read_track(path, LabelSource::Detection);
  REQUIRE(back.intervals().size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.intervals()[i] == t.intervals()[i]);
  std::filesystem::remove(path);
}

TEST_CASE("episode extraction") {
  SUBCASE("recovery time") {
    SessionLog log;
    fixture::annotate(log, 10.0, "distraction_start");
    fixture::annotate(log, 27.71, "refocus");
    const auto eps = extract_episodes(log);
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].recovery_time() == doctest::Approx(17.71));
    CHECK_FALSE(eps[0].open);
  }
  SUBCASE("double start is malformed") {
    SessionLog log;
    fixture::annotate(log, 10.0, "distraction_start");
    fixture::annotate(log, 12.5, "distraction_start");
    try {
      extract_episodes(log);
      FAIL("expected DataError");
    } catch (const mindless::DataError& e) {
      CHECK(std::string(e.what()).find("12.5") != std::string::npos);
    }
  }
  SUBCASE("refocus without start is malformed") {
    SessionLog log;
    fixture::annotate(log, 3.0, "refocus");
    CHECK_THROWS_AS(extract_episodes(log), mindless::DataError);
  }
  SUBCASE("last pattern before refocus") {
    SessionLog log;
    fixture::annotate(log, 1.0, "distraction_start");
    log.append(1.5, EventKind::ConditionAssigned, {{"episode", 0}, {"condition", "treatment"}});
    log.append(1.5, EventKind::ToggleOn, {{"episode", 0}, {"cycle", 0}, {"pattern", "volume_halve"}});
    log.append(4.5, EventKind::ToggleOff, {{"episode", 0}, {"cycle", 1}});
    log.append(7.5, EventKind::ToggleOn, {{"episode", 0}, {"cycle", 2}, {"pattern", "pitch_up"}});
    fixture::annotate(log, 9.0, "refocus");
    const auto eps = extract_episodes(log);
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].condition == mindless::sched::Condition::Treatment);
    CHECK(eps[0].last_pattern == PerturbationPattern::PitchUpOneTone);
    CHECK(eps[0].pattern_history.size() == 2);
  }
  SUBCASE("open episode at log end") {
    SessionLog log;
    fixture::annotate(log, 1.0, "distraction_start");
    log.append(8.0, EventKind::DetectionChange, {{"state", "distracted"}});
    const auto eps = extract_episodes(log);
    REQUIRE(eps.size() == 1);
    CHECK(eps[0].open);
    CHECK(eps[0].end == 8.0);
    const std::vector<Episode> only_open = eps;
    CHECK_THROWS_AS(recovery_time_stats(only_open), mindless::InsufficientData);
  }
}

TEST_CASE("episode extraction ignores unrelated events and is idempotent") {
  const auto log = fixture::manual_trigger_log(5, 12);
  SessionLog annotations_only;
  for (const auto& ev : log.events())
    if (ev.kind == EventKind::Annotation) annotations_only.append(ev);
  const auto full = extract_episodes(log);
  const auto bare = extract_episodes(annotations_only);
  REQUIRE(full.size() == bare.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(full[i].start == bare[i].start);
    CHECK(full[i].end == bare[i].end);
  }
  const auto again = extract_episodes(SessionLog::parse_jsonl(log.to_jsonl()));
  REQUIRE(again.size() == full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    CHECK(again[i].condition == full[i].condition);
    CHECK(again[i].last_pattern == full[i].last_pattern);
    CHECK(again[i].pattern_history == full[i].pattern_history);
  }
}

TEST_CASE("recovery stats compare control minus treatment") {
  std::vector<Episode> eps;
  auto add = [&](double len, mindless::sched::Condition c) {
    Episode e;
    e.start = 100.0 * eps.size();
    e.end = e.start + len;
    e.condition = c;
    eps.push_back(e);
  };
  for (double len : {1.0, 2.0, 3.0}) add(len, mindless::sched::Condition::Treatment);
  for (double len : {3.0, 4.0, 5.0}) add(len, mindless::sched::Condition::Control);
  const auto s = recovery_time_stats(eps);
  CHECK(s.treatment.mean == doctest::Approx(2.0));
  CHECK(s.control.mean == doctest::Approx(4.0));
  CHECK(s.test.effect_size == doctest::Approx(2.0));
  CHECK(s.test.statistic > 0.0);
}

TEST_CASE("report on a manually triggered session") {
  ReportInput in;
  in.sessions.push_back({"s1", fixture::manual_trigger_log(1, 40), std::nullopt});
  const auto r = build_report(in);
  CHECK(r["episode_count"] == 40);
  CHECK(r["recovery_time"]["treatment"]["n"].get<int>() > 1);
  CHECK(r["recovery_time"]["control"]["n"].get<int>() > 1);
  CHECK(r["recovery_time"].contains("test"));
  CHECK(r.contains("pattern_attribution"));
  CHECK_FALSE(r.contains("confusion_matrix"));
  CHECK_FALSE(r["omissions"].empty());
  CHECK_FALSE(render_text(r).empty());
}

TEST_CASE("report on three-part sessions") {
  ReportInput in;
  const std::array<std::array<const char*, 3>, 3> orders = {{{"mindless", "alerting", "control"},
                                                           {"control", "mindless", "alerting"},
                                                           {"alerting", "control", "mindless"}}};
  for (std::size_t i = 0; i < orders.size(); ++i)
    in.sessions.push_back({"s" + std::to_string(i), fixture::three_part_log(i + 1, 600.0, orders[i]), std::nullopt});
  in.questionnaires["workload"] = {{50, 60, 55, 70}, {45, 52, 50, 61}};
  const auto r = build_report(in);
  REQUIRE(r["sessions"][0]["parts"].size() == 3);
  CHECK(r["sessions"][0]["parts"][1]["start"] == 600.0);
  CHECK(r["sessions"][0]["parts"][1]["mode"] == "alerting");
  for (auto mode : {"mindless", "alerting", "control"})
    CHECK(r["distracted_time_by_mode"][mode]["n"] == 3);
  CHECK(r["distracted_time_by_mode"].contains("anova"));
  CHECK(r["distraction_count_by_mode"].contains("anova"));
  REQUIRE(r.contains("confusion_matrix"));
  CHECK(r["confusion_matrix"]["total_minutes"].get<double>() == doctest::Approx(90.0));
  CHECK(r["questionnaires"]["workload"].contains("test"));
  const auto svg = render_svg(r);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("<rect") != std::string::npos);
}

TEST_CASE("external detection track is aligned to the session start") {
  auto log = fixture::three_part_log(9, 120.0, {"mindless", "alerting", "control"});
  SessionLog no_detection;
  for (const auto& ev : log.events())
    if (ev.kind != EventKind::DetectionChange) no_detection.append(ev);
  const auto full = IntervalTrack::from_marks(LabelSource::Detection, 0, 360, A, {});
  ReportInput in;
  in.sessions.push_back({"ext", no_detection, full});
  const auto r = build_report(in);
  REQUIRE(r.contains("confusion_matrix"));
  CHECK(r["confusion_matrix"]["minutes"]["attentive_distracted"] == 0.0);
}

TEST_CASE("empty log yields an empty report") {
  ReportInput in;
  in.sessions.push_back({"empty", SessionLog{}, std::nullopt});
  const auto r = build_report(in);
  CHECK(r["episode_count"] == 0);
  CHECK(r["sessions"][0]["parts"].empty());
  CHECK_FALSE(r["omissions"].empty());
  CHECK_NOTHROW(render_text(r));
  CHECK_NOTHROW(render_svg(r));
}
