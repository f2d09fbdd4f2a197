#include "jacobi/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace jacobi::mp {

InvalidRank::InvalidRank(int rank, int world_size)
    : Error("rank " + std::to_string(rank) + " is outside world of size " +
            std::to_string(world_size)) {}

SelfMessage::SelfMessage(int rank)
    : Error("rank " + std::to_string(rank) + " cannot message itself") {}

WaitAfterConsumed::WaitAfterConsumed()
    : Error("receive payload was already taken by an earlier wait") {}

RangeViolation::RangeViolation(std::size_t offset, std::size_t length,
                               std::size_t window_length)
    : Error("window access [" + std::to_string(offset) + ", " +
            std::to_string(offset + length) + ") exceeds window length " +
            std::to_string(window_length)) {}

NotOwner::NotOwner(int rank, int owner)
    : Error("rank " + std::to_string(rank) + " is not the window owner (rank " +
            std::to_string(owner) + ")") {}

namespace {
std::string join_lines(const std::vector<std::string>& lines) {
  std::string out = "deadlock: every live rank is blocked";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}
}  // namespace

Deadlock::Deadlock(std::vector<std::string> blocked_ranks)
    : Error(join_lines(blocked_ranks)), blocked_(std::move(blocked_ranks)) {}

WorkerPanicked::WorkerPanicked(int rank, const std::string& what)
    : Error("rank " + std::to_string(rank) + " failed: " + what), rank_(rank) {}

RankCounters& RankCounters::operator+=(const RankCounters& o) noexcept {
  p2p_messages += o.p2p_messages;
  p2p_bytes += o.p2p_bytes;
  collective_bytes += o.collective_bytes;
  window_put_bytes += o.window_put_bytes;
  window_get_bytes += o.window_get_bytes;
  return *this;
}

RankCounters operator-(RankCounters a, const RankCounters& b) noexcept {
  a.p2p_messages -= b.p2p_messages;
  a.p2p_bytes -= b.p2p_bytes;
  a.collective_bytes -= b.collective_bytes;
  a.window_put_bytes -= b.window_put_bytes;
  a.window_get_bytes -= b.window_get_bytes;
  return a;
}

RankCounters CommStats::total() const noexcept {
  RankCounters t;
  for (const auto& r : per_rank_) t += r;
  return t;
}

ProcessGroup::ProcessGroup(std::vector<int> members) : members_(std::move(members)) {
  if (members_.empty()) throw jacobi::InvalidArgument("process group must be non-empty");
  auto sorted = members_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw jacobi::InvalidArgument("process group has duplicate members");
  }
}

ProcessGroup ProcessGroup::range(int first, int last) {
  std::vector<int> m;
  for (int r = first; r <= last; ++r) m.push_back(r);
  return ProcessGroup(std::move(m));
}

bool ProcessGroup::contains(int rank) const noexcept {
  return std::find(members_.begin(), members_.end(), rank) != members_.end();
}

double encode_verdict(double distance, bool stop) noexcept {
  return std::copysign(distance, stop ? -1.0 : 1.0);
}
bool verdict_stops(double verdict) noexcept { return std::signbit(verdict); }
double verdict_distance(double verdict) noexcept { return std::fabs(verdict); }

namespace detail {

enum class Channel : int { user = 0, collective = 1, window = 2 };

struct ChannelKey {
  int src;
  Channel channel;
  int tag;
  auto operator<=>(const ChannelKey&) const = default;
};

struct ChannelQueue {
  std::uint64_t delivered = 0;
  std::uint64_t claimed = 0;
  std::unordered_map<std::uint64_t, std::vector<double>> pending;
};

struct Mailbox {
  std::mutex mu;
  std::condition_variable cv;
  std::map<ChannelKey, ChannelQueue> queues;
  std::atomic<std::uint64_t> version{0};
};

/// Thrown inside ranks when the job is being torn down.
struct Cancelled {};

struct PendingPut {
  int origin;
  std::size_t offset;
  std::vector<double> data;
};

struct WindowState {
  WindowState(std::uint64_t id_, int owner_, std::size_t length_, int world, bool record_)
      : id(id_), owner(owner_), length(length_), record(record_), access(world, 0) {}

  const std::uint64_t id;
  const int owner;
  const std::size_t length;
  const bool record;

  mutable std::mutex mu;
  std::vector<double> storage;
  bool exposed = false;
  std::vector<int> exposure_group;
  std::uint64_t epoch = 0;
  std::vector<char> access;
  std::vector<PendingPut> pending;
  std::vector<WindowAccess> log;

  bool exposed_to(int rank) const {
    return exposed &&
           std::find(exposure_group.begin(), exposure_group.end(), rank) !=
               exposure_group.end();
  }
  int post_tag() const { return static_cast<int>(2 * id); }
  int complete_tag() const { return static_cast<int>(2 * id + 1); }
};

struct Job {
  Job(int world, const RunOptions& opts)
      : size(world),
        options(opts),
        counters(world),
        blocked_on(world),
        spin(std::thread::hardware_concurrency() > 1) {
    boxes.reserve(world);
    contexts.reserve(world);
    for (int r = 0; r < world; ++r) {
      boxes.push_back(std::make_unique<Mailbox>());
      contexts.push_back(std::unique_ptr<RankContext>(new RankContext(this, r)));
    }
  }

  const int size;
  const RunOptions options;
  std::vector<std::unique_ptr<Mailbox>> boxes;
  std::vector<std::unique_ptr<RankContext>> contexts;
  std::vector<RankCounters> counters;

  std::atomic<bool> aborted{false};
  std::atomic<int> blocked{0};
  std::atomic<std::uint64_t> progress{0};

  std::mutex state_mu;
  std::vector<std::string> blocked_on;

  std::mutex windows_mu;
  std::vector<std::shared_ptr<WindowState>> windows;

  std::mutex done_mu;
  std::condition_variable done_cv;
  int finished = 0;

  std::mutex failure_mu;
  std::exception_ptr failure;
  int failed_rank = -1;

  const bool spin;

  void deposit(int dest, ChannelKey key, std::vector<double> payload) {
    auto& box = *boxes[dest];
    {
      std::lock_guard lk(box.mu);
      auto& q = box.queues[key];
      q.pending.emplace(q.delivered++, std::move(payload));
      box.version.fetch_add(1, std::memory_order_release);
    }
    progress.fetch_add(1, std::memory_order_relaxed);
    box.cv.notify_all();
  }

  std::uint64_t claim(int me, ChannelKey key) {
    auto& box = *boxes[me];
    std::lock_guard lk(box.mu);
    return box.queues[key].claimed++;
  }

  std::optional<std::vector<double>> try_take(int me, ChannelKey key,
                                              std::uint64_t ticket) {
    auto& box = *boxes[me];
    std::lock_guard lk(box.mu);
    auto& q = box.queues[key];
    auto it = q.pending.find(ticket);
    if (it == q.pending.end()) return std::nullopt;
    auto v = std::move(it->second);
    q.pending.erase(it);
    return v;
  }

  std::vector<double> take(int me, ChannelKey key, std::uint64_t ticket,
                           const char* op) {
    using namespace std::chrono_literals;
    auto& box = *boxes[me];
    std::unique_lock lk(box.mu);
    auto& q = box.queues[key];
    for (;;) {
      if (auto it = q.pending.find(ticket); it != q.pending.end()) {
        auto v = std::move(it->second);
        q.pending.erase(it);
        return v;
      }
      if (aborted.load(std::memory_order_acquire)) throw Cancelled{};
      const auto seen = box.version.load(std::memory_order_acquire);
      if (spin) {
        lk.unlock();
        const auto until = std::chrono::steady_clock::now() + 50us;
        while (box.version.load(std::memory_order_acquire) == seen &&
               std::chrono::steady_clock::now() < until) {
          std::this_thread::yield();
        }
        lk.lock();
        if (box.version.load(std::memory_order_acquire) != seen) continue;
      }
      set_blocked(me, op, key);
      box.cv.wait_for(lk, 50ms, [&] {
        return box.version.load(std::memory_order_acquire) != seen ||
               aborted.load(std::memory_order_acquire);
      });
      clear_blocked(me);
    }
  }

  void set_blocked(int me, const char* op, ChannelKey key) {
    {
      std::lock_guard lk(state_mu);
      blocked_on[me] = "rank " + std::to_string(me) + ": " + op + "(src=" +
                       std::to_string(key.src) + ", tag=" + std::to_string(key.tag) +
                       ")";
    }
    blocked.fetch_add(1, std::memory_order_acq_rel);
  }

  void clear_blocked(int me) {
    blocked.fetch_sub(1, std::memory_order_acq_rel);
    std::lock_guard lk(state_mu);
    blocked_on[me].clear();
  }

  void abort() {
    aborted.store(true, std::memory_order_release);
    for (auto& b : boxes) {
      { std::lock_guard lk(b->mu); }
      b->cv.notify_all();
    }
  }

  void fail(int rank, std::exception_ptr e) {
    {
      std::lock_guard lk(failure_mu);
      if (!failure) {
        failure = std::move(e);
        failed_rank = rank;
      }
    }
    abort();
  }

  std::vector<std::string> blocked_dump() {
    std::lock_guard lk(state_mu);
    std::vector<std::string> out;
    for (const auto& s : blocked_on) {
      if (!s.empty()) out.push_back(s);
    }
    return out;
  }
};

}  // namespace detail

using detail::Channel;
using detail::ChannelKey;

int Window::owner() const noexcept { return state_->owner; }
std::size_t Window::length() const noexcept { return state_->length; }
std::uint64_t Window::id() const noexcept { return state_->id; }

std::vector<WindowAccess> Window::access_log() const {
  std::lock_guard lk(state_->mu);
  return state_->log;
}

bool Request::test() {
  if (complete_) return true;
  auto v = ctx_->job_->try_take(ctx_->rank_, {peer_, Channel::user, tag_}, ticket_);
  if (v) {
    payload_ = std::move(*v);
    complete_ = true;
  }
  return complete_;
}

std::vector<double> Request::wait() {
  if (kind_ == Kind::send) return {};
  if (consumed_) throw WaitAfterConsumed();
  if (!complete_) {
    payload_ = ctx_->job_->take(ctx_->rank_, {peer_, Channel::user, tag_}, ticket_,
                                "wait");
    complete_ = true;
  }
  consumed_ = true;
  return std::move(payload_);
}

int RankContext::size() const noexcept { return job_->size; }

const RankCounters& RankContext::counters() const noexcept {
  return job_->counters[rank_];
}

void RankContext::check_peer(int peer) const {
  if (peer < 0 || peer >= job_->size) throw InvalidRank(peer, job_->size);
  if (peer == rank_) throw SelfMessage(rank_);
}

void RankContext::send(int dest, int tag, std::span<const double> data) {
  check_peer(dest);
  auto& c = job_->counters[rank_];
  c.p2p_messages += 1;
  c.p2p_bytes += data.size() * kBytesPerElement;
  job_->deposit(dest, {rank_, Channel::user, tag}, {data.begin(), data.end()});
}

std::vector<double> RankContext::recv(int src, int tag) {
  check_peer(src);
  const ChannelKey key{src, Channel::user, tag};
  return job_->take(rank_, key, job_->claim(rank_, key), "recv");
}

Request RankContext::isend(int dest, int tag, std::span<const double> data) {
  send(dest, tag, data);
  Request r(this, Request::Kind::send, dest, tag, 0);
  r.complete_ = true;
  return r;
}

Request RankContext::irecv(int src, int tag) {
  check_peer(src);
  const ChannelKey key{src, Channel::user, tag};
  return Request(this, Request::Kind::receive, src, tag, job_->claim(rank_, key));
}

void RankContext::collective_send(int dest, int tag, std::span<const double> data) {
  job_->counters[rank_].collective_bytes += data.size() * kBytesPerElement;
  job_->deposit(dest, {rank_, Channel::collective, tag}, {data.begin(), data.end()});
}

std::vector<double> RankContext::collective_recv(int src, int tag) {
  const ChannelKey key{src, Channel::collective, tag};
  return job_->take(rank_, key, job_->claim(rank_, key), "collective");
}

namespace {
void check_root(int root, int size) {
  if (root < 0 || root >= size) throw InvalidRank(root, size);
}
}  // namespace

std::vector<double> RankContext::gather(int root, std::span<const double> local) {
  check_root(root, size());
  if (rank_ != root) {
    collective_send(root, tags::gather, local);
    return {};
  }
  const std::size_t len = local.size();
  std::vector<double> out(len * size());
  for (int r = 0; r < size(); ++r) {
    auto dst = out.begin() + static_cast<std::ptrdiff_t>(r * len);
    if (r == root) {
      std::copy(local.begin(), local.end(), dst);
      continue;
    }
    auto block = collective_recv(r, tags::gather);
    if (block.size() != len) {
      throw CollectiveMismatch("gather: rank " + std::to_string(r) + " sent " +
                               std::to_string(block.size()) + " values, root has " +
                               std::to_string(len));
    }
    std::copy(block.begin(), block.end(), dst);
  }
  return out;
}

std::vector<double> RankContext::scatter(int root, std::span<const double> full) {
  check_root(root, size());
  if (rank_ != root) return collective_recv(root, tags::scatter);
  const auto p = static_cast<std::size_t>(size());
  if (full.size() % p != 0) {
    throw CollectiveMismatch("scatter: length " + std::to_string(full.size()) +
                             " not divisible by " + std::to_string(p));
  }
  const std::size_t block = full.size() / p;
  for (int r = 0; r < size(); ++r) {
    if (r != root) collective_send(r, tags::scatter, full.subspan(r * block, block));
  }
  auto own = full.subspan(root * block, block);
  return {own.begin(), own.end()};
}

std::vector<double> RankContext::broadcast(int root, std::span<const double> value) {
  check_root(root, size());
  if (rank_ != root) return collective_recv(root, tags::broadcast);
  for (int r = 0; r < size(); ++r) {
    if (r != root) collective_send(r, tags::broadcast, value);
  }
  return {value.begin(), value.end()};
}

double RankContext::broadcast(int root, double value) {
  const double one[1] = {value};
  auto v = broadcast(root, std::span<const double>(one));
  if (v.size() != 1) throw CollectiveMismatch("broadcast: expected a scalar");
  return v[0];
}

std::vector<double> RankContext::allreduce_sum(std::span<const double> local) {
  constexpr int root = 0;
  auto all = gather(root, local);
  std::vector<double> sum;
  if (rank_ == root) {
    const std::size_t len = local.size();
    sum.assign(len, 0.0);
    for (int r = 0; r < size(); ++r) {
      for (std::size_t i = 0; i < len; ++i) sum[i] += all[r * len + i];
    }
  }
  auto out = broadcast(root, sum);
  if (out.size() != local.size()) {
    throw CollectiveMismatch("allreduce: length " + std::to_string(local.size()) +
                             " differs from root's " + std::to_string(out.size()));
  }
  return out;
}

Window RankContext::window_create(int owner, std::size_t length) {
  check_root(owner, size());
  if (length == 0) throw jacobi::InvalidArgument("window length must be >= 1");
  const std::uint64_t seq = windows_created_++;
  std::shared_ptr<detail::WindowState> state;
  {
    std::lock_guard lk(job_->windows_mu);
    auto& ws = job_->windows;
    if (ws.size() <= seq) ws.resize(seq + 1);
    if (!ws[seq]) {
      ws[seq] = std::make_shared<detail::WindowState>(
          seq, owner, length, size(), job_->options.record_window_access);
    } else if (ws[seq]->owner != owner || ws[seq]->length != length) {
      throw CollectiveMismatch("window_create: arguments differ across ranks");
    }
    state = ws[seq];
  }
  if (rank_ == owner) {
    std::lock_guard lk(state->mu);
    state->storage.assign(length, 0.0);
  }
  return Window(std::move(state));
}

void RankContext::window_post(const Window& w, const ProcessGroup& origins) {
  auto& s = *w.state_;
  if (rank_ != s.owner) throw NotOwner(rank_, s.owner);
  for (int r : origins.members()) check_root(r, size());
  {
    std::lock_guard lk(s.mu);
    if (s.exposed) throw EpochViolation("post: exposure epoch already open");
    s.exposed = true;
    s.exposure_group = origins.members();
    ++s.epoch;
  }
  for (int r : origins.members()) {
    job_->deposit(r, {rank_, Channel::window, s.post_tag()}, {});
  }
}

void RankContext::window_wait(const Window& w) {
  auto& s = *w.state_;
  if (rank_ != s.owner) throw NotOwner(rank_, s.owner);
  std::vector<int> group;
  {
    std::lock_guard lk(s.mu);
    if (!s.exposed) throw EpochViolation("wait: no exposure epoch is open");
    group = s.exposure_group;
  }
  for (int r : group) {
    const ChannelKey key{r, Channel::window, s.complete_tag()};
    job_->take(rank_, key, job_->claim(rank_, key), "window_wait");
  }
  std::lock_guard lk(s.mu);
  std::stable_sort(s.pending.begin(), s.pending.end(),
                   [](const auto& a, const auto& b) { return a.origin < b.origin; });
  for (const auto& put : s.pending) {
    std::copy(put.data.begin(), put.data.end(),
              s.storage.begin() + static_cast<std::ptrdiff_t>(put.offset));
  }
  s.pending.clear();
  s.exposed = false;
  s.exposure_group.clear();
}

void RankContext::window_start(const Window& w, const ProcessGroup& targets) {
  auto& s = *w.state_;
  if (!targets.contains(s.owner)) {
    throw EpochViolation("start: target group does not contain the window owner");
  }
  {
    std::lock_guard lk(s.mu);
    if (s.access[rank_]) throw EpochViolation("start: access epoch already open");
  }
  const ChannelKey key{s.owner, Channel::window, s.post_tag()};
  job_->take(rank_, key, job_->claim(rank_, key), "window_start");
  std::lock_guard lk(s.mu);
  s.access[rank_] = 1;
}

void RankContext::window_complete(const Window& w) {
  auto& s = *w.state_;
  {
    std::lock_guard lk(s.mu);
    if (!s.access[rank_]) throw EpochViolation("complete: no access epoch is open");
    s.access[rank_] = 0;
  }
  job_->deposit(s.owner, {rank_, Channel::window, s.complete_tag()}, {});
}

bool RankContext::access_open(const detail::WindowState& s) const {
  return s.access[rank_] && s.exposed_to(rank_);
}

void RankContext::put(const Window& w, std::size_t offset, std::span<const double> data) {
  auto& s = *w.state_;
  if (offset > s.length || data.size() > s.length - offset) {
    throw RangeViolation(offset, data.size(), s.length);
  }
  {
    std::lock_guard lk(s.mu);
    if (!access_open(s)) throw EpochViolation("put outside an access epoch");
    s.pending.push_back({rank_, offset, {data.begin(), data.end()}});
    if (s.record) s.log.push_back({rank_, WindowOp::put, offset, data.size(), s.epoch});
  }
  job_->counters[rank_].window_put_bytes += data.size() * kBytesPerElement;
}

std::vector<double> RankContext::get(const Window& w, std::size_t offset,
                                     std::size_t length) {
  auto& s = *w.state_;
  if (offset > s.length || length > s.length - offset) {
    throw RangeViolation(offset, length, s.length);
  }
  std::vector<double> out;
  {
    std::lock_guard lk(s.mu);
    if (!access_open(s)) throw EpochViolation("get outside an access epoch");
    const auto first = s.storage.begin() + static_cast<std::ptrdiff_t>(offset);
    out.assign(first, first + static_cast<std::ptrdiff_t>(length));
    if (s.record) s.log.push_back({rank_, WindowOp::get, offset, length, s.epoch});
  }
  job_->counters[rank_].window_get_bytes += length * kBytesPerElement;
  return out;
}

std::span<double> RankContext::local_window(const Window& w) {
  auto& s = *w.state_;
  if (rank_ != s.owner) throw NotOwner(rank_, s.owner);
  std::lock_guard lk(s.mu);
  if (s.exposed) throw EpochViolation("local access during an exposure epoch");
  return s.storage;
}

CommStats run_spmd_impl(int world_size, const std::function<void(RankContext&)>& body,
                        const RunOptions& options) {
  if (world_size < 1) throw jacobi::InvalidArgument("world size must be >= 1");
  detail::Job job(world_size, options);

  std::vector<std::thread> workers;
  workers.reserve(world_size);
  for (int r = 0; r < world_size; ++r) {
    workers.emplace_back([&job, &body, r] {
      try {
        body(*job.contexts[r]);
      } catch (const detail::Cancelled&) {
      } catch (...) {
        job.fail(r, std::current_exception());
      }
      {
        std::lock_guard lk(job.done_mu);
        ++job.finished;
      }
      job.done_cv.notify_all();
    });
  }

  // Watchdog: every live rank blocked with no progress for the interval.
  std::vector<std::string> deadlock_dump;
  {
    using clock = std::chrono::steady_clock;
    auto quiet_since = clock::now();
    auto last_progress = job.progress.load();
    std::unique_lock lk(job.done_mu);
    while (job.finished < world_size) {
      job.done_cv.wait_for(lk, std::chrono::milliseconds(10));
      const int live = world_size - job.finished;
      const auto progress = job.progress.load();
      const auto now = clock::now();
      if (live == 0 || job.aborted.load() || job.blocked.load() != live ||
          progress != last_progress) {
        quiet_since = now;
        last_progress = progress;
        continue;
      }
      if (now - quiet_since >= options.watchdog_interval) {
        deadlock_dump = job.blocked_dump();
        lk.unlock();
        job.abort();
        lk.lock();
      }
    }
  }
  for (auto& t : workers) t.join();

  if (job.failure) {
    try {
      std::rethrow_exception(job.failure);
    } catch (const jacobi::Error&) {
      throw;
    } catch (const std::exception& e) {
      throw WorkerPanicked(job.failed_rank, e.what());
    } catch (...) {
      throw WorkerPanicked(job.failed_rank, "unknown exception");
    }
  }
  if (!deadlock_dump.empty()) throw Deadlock(std::move(deadlock_dump));
  return CommStats(std::move(job.counters));
}

}  // namespace jacobi::mp
