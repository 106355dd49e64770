#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "campusride/dispatch/dispatch_queue.hpp"
#include "campusride/domain/error.hpp"

using namespace campusride;
using namespace campusride::dispatch;

namespace {

RideRequest req(const std::string& id, std::int64_t created_ms, int seats = 1, const std::string& rider = "") {
  RideRequest r;
  r.request_id = RequestId{id};
  r.rider_id = AccountId{rider.empty() ? "rider-" + id : rider};
  r.pickup = {29.99, 31.45};
  r.dropoff = {29.98, 31.44};
  r.seats = seats;
  r.created_at = from_millis(created_ms);
  return r;
}

CarAgent car(const std::string& id, int seats = 4, bool available = true) {
  CarAgent c;
  c.car_id = CarId{id};
  c.capacity = 4;
  c.seats_available = seats;
  c.available = available;
  return c;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::AssertionFailed;
}

}  // namespace

TEST_CASE("enqueue returns the FIFO rank") {
  DispatchQueue q;
  CHECK(q.enqueue_request(req("r1", 1)) == 0);
  CHECK(q.enqueue_request(req("r2", 2)) == 1);
  CHECK(q.enqueue_request(req("r0", 0)) == 0);
  CHECK(code_of([&] { q.enqueue_request(req("r1", 5)); }) == ErrorCode::DuplicateRequest);
  const auto bad = code_of([&] { q.enqueue_request(req("r9", 9, 0)); });
  CHECK(bad == ErrorCode::InvalidRequest);
}

TEST_CASE("request validation reports each field") {
  auto r = req("r1", 1, 5);
  r.pickup = {95, 0};
  const auto issues = validate_request(r);
  std::vector<std::string> fields;
  for (const auto& i : issues) fields.push_back(i.field);
  CHECK(std::find(fields.begin(), fields.end(), "seats") != fields.end());
  CHECK(std::find(fields.begin(), fields.end(), "pickup") != fields.end());
  CHECK(validate_request(req("ok", 1, kMaxSeats)).empty());
}

TEST_CASE("available cars are ordered by id") {
  CHECK(find_available_cars(std::vector<CarAgent>{}).empty());
  const std::vector<CarAgent> mixed{car("A"), car("B", 4, false)};
  const auto only_a = find_available_cars(mixed);
  REQUIRE(only_a.size() == 1);
  CHECK(only_a[0].car_id == CarId{"A"});

  const std::vector<CarAgent> fleet{car("C"), car("B"), car("A")};
  auto oracle = fleet;
  std::sort(oracle.begin(), oracle.end(), [](const auto& x, const auto& y) { return x.car_id < y.car_id; });
  CHECK(find_available_cars(fleet) == oracle);
}

TEST_CASE("seat compatibility") {
  CHECK(evaluate_acceptance(car("A", 3), req("r", 1, 2)) == Acceptance::Accept);
  CHECK(evaluate_acceptance(car("A", 1), req("r", 1, 2)) == Acceptance::Reject);
  CHECK(evaluate_acceptance(car("A", 2), req("r", 1, 2)) == Acceptance::Accept);
}

TEST_CASE("offers are strictly FIFO") {
  DispatchQueue q;
  q.enqueue_request(req("r2", 2));
  q.enqueue_request(req("r1", 1));
  CHECK(q.next_unoffered()->request_id == RequestId{"r1"});
  CHECK(code_of([&] { q.offer(RequestId{"r2"}, {CarId{"A"}}, from_millis(10)); }) == ErrorCode::InvalidArgument);
  CHECK_FALSE(q.offer(RequestId{"r1"}, {CarId{"A"}}, from_millis(10)).has_value());
  CHECK(q.next_unoffered()->request_id == RequestId{"r2"});
}

TEST_CASE("claims") {
  DispatchQueue q;
  auto a = car("A");
  auto b = car("B", 1);
  CHECK(code_of([&] { q.claim_request(RequestId{"nope"}, a, RideId{"x"}, from_millis(1)); }) ==
        ErrorCode::UnknownRequest);

  q.enqueue_request(req("r1", 1, 2));
  q.offer(RequestId{"r1"}, {CarId{"A"}, CarId{"B"}}, from_millis(2));
  auto c = car("C");
  CHECK(code_of([&] { q.claim_request(RequestId{"r1"}, c, RideId{"x"}, from_millis(3)); }) == ErrorCode::NotOffered);
  CHECK(code_of([&] { q.claim_request(RequestId{"r1"}, b, RideId{"x"}, from_millis(3)); }) == ErrorCode::SeatMismatch);
  CHECK(b.seats_available == 1);

  const auto ride = q.claim_request(RequestId{"r1"}, a, RideId{"ride-1"}, from_millis(4));
  CHECK(ride.stage == RideStage::StartJourney);
  CHECK(ride.car_id == CarId{"A"});
  CHECK(a.seats_available == 2);
  CHECK_FALSE(a.available);
  CHECK(q.resolution(RequestId{"r1"})->outcome == OfferOutcome::accepted(CarId{"A"}));
  auto a2 = car("A");
  CHECK(code_of([&] { q.claim_request(RequestId{"r1"}, a2, RideId{"x"}, from_millis(3)); }) ==
        ErrorCode::AlreadyClaimed);
  CHECK(code_of([&] { q.reject_request(RequestId{"r1"}, CarId{"A"}); }) == ErrorCode::AlreadyClaimed);
}

TEST_CASE("busy cars cannot claim") {
  DispatchQueue q;
  q.enqueue_request(req("r1", 1));
  q.offer(RequestId{"r1"}, {CarId{"A"}}, from_millis(2));
  auto busy = car("A", 4, false);
  CHECK(code_of([&] { q.claim_request(RequestId{"r1"}, busy, RideId{"x"}, from_millis(3)); }) ==
        ErrorCode::CarUnavailable);
}

TEST_CASE("rejections resolve once every offered car declined") {
  SUBCASE("sole car rejects") {
    DispatchQueue q;
    q.enqueue_request(req("r1", 1));
    q.offer(RequestId{"r1"}, {CarId{"A"}}, from_millis(2));
    CHECK(q.reject_request(RequestId{"r1"}, CarId{"A"}) == OfferOutcome::rejected());
  }
  SUBCASE("acceptance wins regardless of rejection order") {
    for (bool reject_first : {true, false}) {
      DispatchQueue q;
      q.enqueue_request(req("r1", 1));
      q.offer(RequestId{"r1"}, {CarId{"A"}, CarId{"B"}}, from_millis(2));
      auto b = car("B");
      if (reject_first) {
        CHECK_FALSE(q.reject_request(RequestId{"r1"}, CarId{"A"}).has_value());
        q.claim_request(RequestId{"r1"}, b, RideId{"ride"}, from_millis(3));
      } else {
        q.claim_request(RequestId{"r1"}, b, RideId{"ride"}, from_millis(3));
        CHECK(code_of([&] { q.reject_request(RequestId{"r1"}, CarId{"A"}); }) == ErrorCode::AlreadyClaimed);
      }
      CHECK(q.resolution(RequestId{"r1"})->outcome.kind == OfferKind::Accepted);
    }
  }
  SUBCASE("no cars") {
    DispatchQueue q;
    q.enqueue_request(req("r1", 1));
    CHECK(q.offer(RequestId{"r1"}, {}, from_millis(2)) == OfferOutcome::no_cars());
    CHECK(q.size() == 0);
  }
}

TEST_CASE("offer timeouts") {
  DispatchQueue q;
  q.enqueue_request(req("r1", 1));
  q.enqueue_request(req("r2", 2));
  q.offer(RequestId{"r1"}, {CarId{"A"}}, from_millis(1000));
  q.offer(RequestId{"r2"}, {CarId{"A"}}, from_millis(20000));
  CHECK(q.expire_offers(from_millis(30999), kDefaultOfferTimeout).empty());
  const auto expired = q.expire_offers(from_millis(31000), kDefaultOfferTimeout);
  REQUIRE(expired.size() == 1);
  CHECK(expired[0].request_id == RequestId{"r1"});
  CHECK(expired[0].outcome == OfferOutcome::rejected());
  CHECK(q.size() == 1);
}

TEST_CASE("FIFO property over random interleavings") {
  // Reference model: offers must go out in (created_at, id) order among
  // requests still unresolved.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    DispatchQueue q;
    std::vector<std::pair<std::int64_t, std::string>> offered_order;
    int next_id = 0;
    std::int64_t now = 0;
    for (int step = 0; step < 60; ++step) {
      now += 1;
      switch (rng() % 3) {
        case 0: {
          const auto created = static_cast<std::int64_t>(rng() % 1000);
          const auto id = fmt::format("r{:03}", next_id++);
          try {
            q.enqueue_request(req(id, created));
          } catch (const Error&) {
          }
          break;
        }
        case 1:
          if (auto next = q.next_unoffered()) {
            q.offer(next->request_id, {CarId{"A"}}, from_millis(now));
            offered_order.emplace_back(to_millis(next->created_at), next->request_id.str());
            // Nothing earlier than the offered request may still be waiting.
            for (const auto& e : q.entries()) {
              if (e.state == RequestState::Queued) {
                CHECK(std::pair(to_millis(e.created_at), e.request_id.str()) >
                      std::pair(to_millis(next->created_at), next->request_id.str()));
              }
            }
          }
          break;
        default: {
          const auto ids = q.in_flight();
          if (!ids.empty()) {
            auto it = ids.begin();
            std::advance(it, static_cast<long>(rng() % ids.size()));
            q.reject_request(*it, CarId{"A"});
          }
          break;
        }
      }
    }
  }
}

TEST_CASE("exactly one winner per concurrent claim and seats are conserved") {
  for (int trial = 0; trial < 300; ++trial) {
    DispatchQueue q;
    q.enqueue_request(req("r1", 1, 2));
    q.offer(RequestId{"r1"}, {CarId{"A"}, CarId{"B"}, CarId{"C"}}, from_millis(2));
    std::vector<CarAgent> cars{car("A"), car("B"), car("C")};
    std::atomic<int> wins{0};
    std::atomic<int> claimed{0};
    std::vector<std::thread> threads;
    std::vector<Ride> rides(3);
    for (std::size_t i = 0; i < cars.size(); ++i) {
      threads.emplace_back([&, i] {
        try {
          rides[i] = q.claim_request(RequestId{"r1"}, cars[i], RideId{fmt::format("ride-{}", i)}, from_millis(3));
          ++wins;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::AlreadyClaimed) ++claimed;
        }
      });
    }
    for (auto& t : threads) t.join();
    CHECK(wins == 1);
    CHECK(claimed == 2);
    for (std::size_t i = 0; i < cars.size(); ++i) {
      const int held = rides[i].ride_id.empty() ? 0 : rides[i].request.seats;
      CHECK(held + cars[i].seats_available == cars[i].capacity);
    }
  }
}

TEST_CASE("restored state behaves like the original") {
  DispatchQueue q;
  QueueEntry e;
  e.request = req("r5", 5);
  e.request.state = RequestState::Offered;
  e.offered = {CarId{"A"}};
  e.offered_at = from_millis(10);
  q.restore_entry(e);
  q.restore_resolution({RequestId{"r1"}, AccountId{"x"}, OfferOutcome::rejected()});
  CHECK(q.find(RequestId{"r5"})->offered == std::set<CarId>{CarId{"A"}});
  CHECK(code_of([&] { q.reject_request(RequestId{"r1"}, CarId{"A"}); }) == ErrorCode::AlreadyClaimed);
  CHECK(q.reject_request(RequestId{"r5"}, CarId{"A"}) == OfferOutcome::rejected());
}
