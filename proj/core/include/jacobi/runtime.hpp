#pragma once

// In-process SPMD message-passing runtime.
//
// run_spmd() spawns one thread per rank and hands each a RankContext. Ranks
// talk through buffered point-to-point channels (FIFO per (src, dest, tag)),
// star-topology collectives, and one-sided windows synchronized with
// post/wait (target side) and start/complete (origin side) epochs. Every
// transfer is metered into CommStats on the sending/origin rank.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "jacobi/linalg.hpp"

namespace jacobi::mp {

/// Static per-phase tags.
namespace tags {
inline constexpr int shift = 1;
inline constexpr int gather = 2;
inline constexpr int broadcast = 3;
inline constexpr int control = 4;
inline constexpr int scatter = 5;
}  // namespace tags

inline constexpr std::size_t kBytesPerElement = sizeof(double);

class Error : public jacobi::Error {
 public:
  using jacobi::Error::Error;
};

class InvalidRank : public Error {
 public:
  InvalidRank(int rank, int world_size);
};

class SelfMessage : public Error {
 public:
  explicit SelfMessage(int rank);
};

class WaitAfterConsumed : public Error {
 public:
  WaitAfterConsumed();
};

class CollectiveMismatch : public Error {
 public:
  using Error::Error;
};

class EpochViolation : public Error {
 public:
  using Error::Error;
};

class RangeViolation : public Error {
 public:
  RangeViolation(std::size_t offset, std::size_t length, std::size_t window_length);
};

class NotOwner : public Error {
 public:
  NotOwner(int rank, int owner);
};

class Deadlock : public Error {
 public:
  explicit Deadlock(std::vector<std::string> blocked_ranks);
  const std::vector<std::string>& blocked_ranks() const noexcept { return blocked_; }

 private:
  std::vector<std::string> blocked_;
};

/// A worker threw something that is not a library error.
class WorkerPanicked : public Error {
 public:
  WorkerPanicked(int rank, const std::string& what);
  int rank() const noexcept { return rank_; }

 private:
  int rank_;
};

struct RankCounters {
  std::uint64_t p2p_messages = 0;
  std::uint64_t p2p_bytes = 0;
  std::uint64_t collective_bytes = 0;
  std::uint64_t window_put_bytes = 0;
  std::uint64_t window_get_bytes = 0;

  RankCounters& operator+=(const RankCounters& o) noexcept;
  friend RankCounters operator-(RankCounters a, const RankCounters& b) noexcept;
  friend bool operator==(const RankCounters&, const RankCounters&) = default;
};

class CommStats {
 public:
  CommStats() = default;
  explicit CommStats(std::vector<RankCounters> per_rank) : per_rank_(std::move(per_rank)) {}

  std::size_t ranks() const noexcept { return per_rank_.size(); }
  const RankCounters& rank(std::size_t r) const { return per_rank_.at(r); }
  const std::vector<RankCounters>& per_rank() const noexcept { return per_rank_; }
  RankCounters total() const noexcept;

  friend bool operator==(const CommStats&, const CommStats&) = default;

 private:
  std::vector<RankCounters> per_rank_;
};

/// Non-empty set of distinct ranks.
class ProcessGroup {
 public:
  explicit ProcessGroup(std::vector<int> members);
  /// Ranks first .. last inclusive.
  static ProcessGroup range(int first, int last);

  const std::vector<int>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool contains(int rank) const noexcept;

 private:
  std::vector<int> members_;
};

struct RunOptions {
  /// Abort with Deadlock when every live rank stays blocked this long
  /// without any message or epoch progress.
  std::chrono::milliseconds watchdog_interval{5000};
  /// Keep a per-window log of put/get calls (see Window::access_log).
  bool record_window_access = false;
};

enum class WindowOp { get, put };

struct WindowAccess {
  int origin;
  WindowOp op;
  std::size_t offset;
  std::size_t length;
  /// Exposure epoch of the target (1-based) in which the access happened.
  std::uint64_t epoch;
};

namespace detail {
struct Job;
struct WindowState;
}  // namespace detail

/// Handle to a window owned by one rank. Cheap to copy.
class Window {
 public:
  int owner() const noexcept;
  std::size_t length() const noexcept;
  std::uint64_t id() const noexcept;
  /// Snapshot of the access log; empty unless RunOptions::record_window_access.
  std::vector<WindowAccess> access_log() const;

 private:
  friend class RankContext;
  explicit Window(std::shared_ptr<detail::WindowState> s) : state_(std::move(s)) {}
  std::shared_ptr<detail::WindowState> state_;
};

class RankContext;

/// Handle returned by isend/irecv. Confined to the issuing rank.
class Request {
 public:
  enum class Kind { send, receive };

  Kind kind() const noexcept { return kind_; }
  int peer() const noexcept { return peer_; }
  int tag() const noexcept { return tag_; }

  /// Polls without blocking. Once true, stays true.
  bool test();
  /// Blocks until complete. A receive yields its payload exactly once;
  /// a second wait() on it throws WaitAfterConsumed. Sends yield {}.
  std::vector<double> wait();

 private:
  friend class RankContext;
  Request(RankContext* ctx, Kind kind, int peer, int tag, std::uint64_t ticket)
      : ctx_(ctx), kind_(kind), peer_(peer), tag_(tag), ticket_(ticket) {}

  RankContext* ctx_;
  Kind kind_;
  int peer_;
  int tag_;
  std::uint64_t ticket_;
  bool complete_ = false;
  bool consumed_ = false;
  std::vector<double> payload_;
};

class RankContext {
 public:
  RankContext(const RankContext&) = delete;
  RankContext& operator=(const RankContext&) = delete;

  int rank() const noexcept { return rank_; }
  int size() const noexcept;
  const RankCounters& counters() const noexcept;

  // Point to point. Sends are buffered and never block.
  void send(int dest, int tag, std::span<const double> data);
  std::vector<double> recv(int src, int tag);
  Request isend(int dest, int tag, std::span<const double> data);
  Request irecv(int src, int tag);

  // Collectives over the whole world, star topology rooted at `root`.
  /// Concatenation of every rank's block in rank order at root; {} elsewhere.
  /// All blocks must have the same length.
  std::vector<double> gather(int root, std::span<const double> local);
  /// Root passes the full vector (length divisible by size()); others pass {}.
  std::vector<double> scatter(int root, std::span<const double> full);
  std::vector<double> broadcast(int root, std::span<const double> value);
  double broadcast(int root, double value);
  std::vector<double> allreduce_sum(std::span<const double> local);

  // One-sided windows.
  /// Collective. Only the owner allocates (zero-initialized) storage.
  Window window_create(int owner, std::size_t length);
  /// Target side: open an exposure epoch for `origins`.
  void window_post(const Window& w, const ProcessGroup& origins);
  /// Target side: close the exposure epoch once every origin has completed.
  /// Puts issued in the epoch become visible here.
  void window_wait(const Window& w);
  /// Origin side: open an access epoch; blocks until the target has posted.
  void window_start(const Window& w, const ProcessGroup& targets);
  void window_complete(const Window& w);
  void put(const Window& w, std::size_t offset, std::span<const double> data);
  /// Reads the window as it was when the current exposure epoch opened.
  std::vector<double> get(const Window& w, std::size_t offset, std::size_t length);
  /// Owner-only direct access, outside exposure epochs.
  std::span<double> local_window(const Window& w);

 private:
  friend class Request;
  friend struct detail::Job;
  RankContext(detail::Job* job, int rank) : job_(job), rank_(rank) {}

  void check_peer(int peer) const;
  std::vector<double> collective_recv(int src, int tag);
  void collective_send(int dest, int tag, std::span<const double> data);
  bool access_open(const detail::WindowState& s) const;

  detail::Job* job_;
  int rank_;
  std::uint64_t windows_created_ = 0;
};

CommStats run_spmd_impl(int world_size, const std::function<void(RankContext&)>& body,
                        const RunOptions& options);

template <class T>
struct SpmdResult {
  std::vector<T> results;
  CommStats stats;
};

template <>
struct SpmdResult<void> {
  CommStats stats;
};

/// Runs `body(ctx)` on `world_size` concurrent ranks and joins them.
/// Library errors thrown by a rank are rethrown unchanged after the other
/// ranks are cancelled; any other exception becomes WorkerPanicked.
template <class F>
auto run_spmd(int world_size, F&& body, const RunOptions& options = {})
    -> SpmdResult<std::invoke_result_t<F&, RankContext&>> {
  using T = std::invoke_result_t<F&, RankContext&>;
  if constexpr (std::is_void_v<T>) {
    return {run_spmd_impl(world_size, std::function<void(RankContext&)>(body), options)};
  } else {
    std::vector<std::optional<T>> slots(world_size > 0 ? world_size : 0);
    auto stats = run_spmd_impl(
        world_size,
        [&](RankContext& ctx) { slots[ctx.rank()].emplace(body(ctx)); },
        options);
    SpmdResult<T> out{{}, std::move(stats)};
    out.results.reserve(slots.size());
    for (auto& s : slots) out.results.push_back(std::move(*s));
    return out;
  }
}

/// Stop verdicts travel as one double: the distance with the sign bit set
/// when the root decided to stop.
double encode_verdict(double distance, bool stop) noexcept;
bool verdict_stops(double verdict) noexcept;
double verdict_distance(double verdict) noexcept;

}  // namespace jacobi::mp
