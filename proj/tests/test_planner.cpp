#include <gtest/gtest.h>

#include "support.hpp"

using namespace triflow;

namespace {

StructuredQuery generated_query(const SandboxDataset& d, int n_dest, int days) {
  StructuredQuery q;
  q.origin = d.cities()[0].name;
  for (int i = 1; i <= n_dest; ++i) q.destinations.push_back(d.cities()[static_cast<std::size_t>(i)].name);
  for (int i = 0; i < days; ++i) q.dates.push_back(Date{2024, 3, 2}.plus_days(i));
  q.party_size = 2;
  q.budget = 50'000'000;
  return q;
}

Candidate restaurant(const char* name, Cents cost) { return Candidate{PlaceRef{name, "Alpha"}, name, cost, {}}; }

struct FillFixture {
  SandboxDataset d{support::micro_tables()};
  StructuredQuery q = support::micro_query(false);
  RetrievedSubset s = retrieve_subset(q, d);
  SandboxDataset domain = as_dataset(s);
  MockAgent agent;

  FillContext ctx(double temperature, std::uint64_t seed = 0) {
    return FillContext{q, s, domain, StageRole{Stage::planning, temperature}, seed, 3};
  }
};

}  // namespace

TEST(Skeleton, OneDestinationTakesAllNights) {
  const SandboxDataset d(support::micro_tables());
  const auto q = support::micro_query(false);
  MockAgent agent;
  const auto sk = build_skeleton(q, retrieve_subset(q, d), agent);
  EXPECT_EQ(sk.city_order, (std::vector<std::string>{"Home", "Alpha", "Home"}));
  EXPECT_EQ(sk.nights_per_city.at("Alpha"), 2);
  ASSERT_EQ(sk.day_to_city.size(), 3u);
  EXPECT_EQ(sk.day_to_city[0], (DayCity{"Home", "Alpha"}));
  EXPECT_EQ(sk.day_to_city[1], (DayCity{"Alpha", std::nullopt}));
  EXPECT_EQ(sk.day_to_city[2], (DayCity{"Alpha", "Home"}));
}

TEST(Skeleton, TwoDestinationsPickTheShorterLoop) {
  const auto d = generate_synthetic(1);
  const auto q = generated_query(d, 2, 5);
  const auto s = retrieve_subset(q, d);
  MockAgent agent;
  const auto sk = build_skeleton(q, s, agent);

  auto km = [&](const std::string& a, const std::string& b) { return d.find_distance(a, b)->distance_km; };
  const auto& o = q.origin;
  const auto& x = q.destinations[0];
  const auto& y = q.destinations[1];
  const double xy = km(o, x) + km(x, y) + km(y, o);
  const double yx = km(o, y) + km(y, x) + km(x, o);
  const std::vector<std::string> best = xy <= yx ? std::vector{o, x, y, o} : std::vector{o, y, x, o};
  EXPECT_EQ(sk.city_order, best);
  EXPECT_DOUBLE_EQ(sk.distance_km, std::min(xy, yx));
  EXPECT_EQ(sk.nights_per_city.at(best[1]), 2);
  EXPECT_EQ(sk.nights_per_city.at(best[2]), 2);
}

TEST(Skeleton, SevenDaysOverThreeCitiesSplitsEvenly) {
  const auto d = generate_synthetic(1);
  const auto q = generated_query(d, 3, 7);
  MockAgent agent;
  const auto sk = build_skeleton(q, retrieve_subset(q, d), agent);
  ASSERT_EQ(sk.city_order.size(), 5u);
  for (const auto& c : q.destinations) EXPECT_EQ(sk.nights_per_city.at(c), 2) << c;
  int transitions = 0;
  for (const auto& dc : sk.day_to_city) transitions += dc.to_city.has_value();
  EXPECT_EQ(transitions, 4);
}

TEST(Skeleton, RemainderGoesToLaterCities) {
  EXPECT_EQ(allocate_nights(4, 1), (std::vector<int>{4}));
  EXPECT_EQ(allocate_nights(5, 3), (std::vector<int>{1, 2, 2}));
  EXPECT_EQ(allocate_nights(6, 4), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_TRUE(allocate_nights(3, 0).empty());
}

TEST(Skeleton, NoCoverableOrderingThrows) {
  auto t = support::micro_tables();
  t.flights.clear();
  t.distances = {{"Home", "Alpha", 300, 225, 30000, 15000}};
  const SandboxDataset d(t);
  const auto q = support::micro_query(false);
  const auto s = retrieve_subset_best_effort(q, d);
  MockAgent agent;
  EXPECT_THROW(build_skeleton(q, s, agent), SkeletonInfeasible);
  EXPECT_NO_THROW(build_skeleton(q, s, agent, SkeletonOptions{false, 0}));
}

TEST(FillSlot, SingleCandidateIsTaken) {
  FillFixture f;
  const auto it = support::micro_skeleton();
  const SlotId slot{SlotKind::lunch, 1, 0};
  const auto out = fill_slot(it, slot, {restaurant("Bistro", 6000)}, {}, f.agent, f.ctx(0.6));
  EXPECT_EQ(out.days[1].lunch, (PlaceRef{"Bistro", "Alpha"}));
  EXPECT_FALSE(out.ledger.entries().empty());
}

TEST(FillSlot, ZeroTemperatureTakesTheTopCandidate) {
  FillFixture f;
  const SlotId slot{SlotKind::dinner, 1, 0};
  const auto out = fill_slot(support::micro_skeleton(), slot,
                             {restaurant("Corner Cafe", 1800), restaurant("Diner", 3000), restaurant("Bistro", 6000)},
                             {}, f.agent, f.ctx(0.0, 99));
  EXPECT_EQ(out.days[1].dinner->name, "Corner Cafe");
}

TEST(FillSlot, DuplicateIsRejectedAndTheNextOneTaken) {
  FillFixture f;
  auto it = support::micro_skeleton();
  it.days[0].lunch = PlaceRef{"Diner", "Alpha"};
  const SlotValidator v{{"diverse_restaurants"}, nullptr};
  const auto out = fill_slot(it, SlotId{SlotKind::lunch, 1, 0},
                             {restaurant("Diner", 3000), restaurant("Trattoria", 5000)}, v, f.agent, f.ctx(0.0));
  EXPECT_EQ(out.days[1].lunch->name, "Trattoria");
}

TEST(FillSlot, FilledSlotIsAContractViolation) {
  FillFixture f;
  auto it = support::micro_skeleton();
  it.days[1].lunch = PlaceRef{"Diner", "Alpha"};
  EXPECT_THROW(fill_slot(it, SlotId{SlotKind::lunch, 1, 0}, {restaurant("Bistro", 1)}, {}, f.agent, f.ctx(0.3)),
               ContractViolation);
}

TEST(FillSlot, NothingValidIsSlotInfeasible) {
  FillFixture f;
  auto it = support::micro_skeleton();
  it.days[0].lunch = PlaceRef{"Diner", "Alpha"};
  const SlotValidator v{{"diverse_restaurants"}, nullptr};
  EXPECT_THROW(fill_slot(it, SlotId{SlotKind::lunch, 1, 0}, {restaurant("Diner", 3000)}, v, f.agent, f.ctx(0.3)),
               SlotInfeasible);
  EXPECT_THROW(fill_slot(it, SlotId{SlotKind::lunch, 1, 0}, {}, v, f.agent, f.ctx(0.3)), SlotInfeasible);
}

TEST(FillSlot, ExtraValidatorIsConsulted) {
  FillFixture f;
  const SlotValidator v{{}, [](const Itinerary& t) { return t.days[1].lunch->name != "Corner Cafe"; }};
  const auto out = fill_slot(support::micro_skeleton(), SlotId{SlotKind::lunch, 1, 0},
                             {restaurant("Corner Cafe", 1), restaurant("Diner", 2)}, v, f.agent, f.ctx(0.0));
  EXPECT_EQ(out.days[1].lunch->name, "Diner");
}

TEST(Plan, MicroSandboxPlanPassesEverything) {
  const SandboxDataset d(support::micro_tables());
  const auto q = support::micro_query(true, 120000);
  const auto s = retrieve_subset(q, d);
  MockAgent agent;
  const auto r = plan(q, s, agent);
  EXPECT_TRUE(r.gaps.empty());
  const auto report = check_all(r.itinerary, q, s, d);
  for (const auto& res : report.results) EXPECT_TRUE(res.passed) << res.id.name;
}

TEST(Plan, SameSeedSamePlan) {
  const auto bench = support::make_bench(4, 6);
  MockAgent agent;
  for (const auto& req : bench.requests) {
    const auto q = decompose_query(req, bench.dataset, agent);
    const auto s = retrieve_subset(q, bench.dataset);
    const auto a = plan(q, s, agent, PlannerOptions{{Stage::planning, 0.3}, 17, 3, nullptr});
    const auto b = plan(q, s, agent, PlannerOptions{{Stage::planning, 0.3}, 17, 3, nullptr});
    EXPECT_EQ(to_json(a.itinerary), to_json(b.itinerary));
  }
}

TEST(Plan, SelfDriveBanIsRespected) {
  const SandboxDataset d(support::micro_tables());
  auto q = support::micro_query(false, 1'000'000);
  q.hard.transport_bans = {TransportMode::self_drive};
  const auto s = retrieve_subset(q, d);
  MockAgent agent;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = plan(q, s, agent, PlannerOptions{{Stage::planning, 0.3}, seed, 3, nullptr});
    for (const auto& day : r.itinerary.days)
      if (day.transport) EXPECT_NE(day.transport->mode, TransportMode::self_drive);
  }
}

TEST(Plan, OnFillSeesEverySlotOnce) {
  const SandboxDataset d(support::micro_tables());
  const auto q = support::micro_query(false, 1'000'000);
  const auto s = retrieve_subset(q, d);
  MockAgent agent;
  std::vector<SlotId> seen;
  PlannerOptions opts;
  opts.on_fill = [&](const Itinerary&, const SlotId& slot) { seen.push_back(slot); };
  const auto r = plan(q, s, agent, opts);
  EXPECT_EQ(seen, fill_order(itinerary_from_skeleton(q, r.skeleton)));
}

TEST(Plan, UnfillableSlotsBecomeGaps) {
  auto t = support::micro_tables();
  std::erase_if(t.attractions, [](const Attraction& a) { return a.name != "Alpha Museum"; });
  const SandboxDataset d(t);
  const auto q = support::micro_query(false, 1'000'000);
  const auto s = retrieve_subset(q, d);
  MockAgent agent;
  const auto r = plan(q, s, agent);
  EXPECT_FALSE(r.gaps.empty());
  for (const auto& g : r.gaps) EXPECT_EQ(g.kind, SlotKind::attraction);
  EXPECT_TRUE(check_all(r.itinerary, q, s, d).passed("diverse_attractions"));
}
