#include "safemdp/state_set.hpp"

#include "safemdp/errors.hpp"

namespace safemdp {

StateSet::StateSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

StateSet::StateSet(std::size_t universe, std::initializer_list<StateId> members)
    : StateSet(universe) {
  for (StateId s : members) insert(s);
}

StateSet StateSet::full(std::size_t universe) {
  StateSet set(universe);
  for (auto& w : set.words_) w = ~std::uint64_t{0};
  set.trim();
  return set;
}

StateSet StateSet::from_members(std::size_t universe, const std::vector<StateId>& members) {
  StateSet set(universe);
  for (StateId s : members) set.insert(s);
  return set;
}

StateSet StateSet::from_bits(const std::string& bits) {
  StateSet set(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      set.insert(static_cast<StateId>(i));
    } else if (bits[i] != '0') {
      throw DomainError("state set bit string may only contain '0' and '1'");
    }
  }
  return set;
}

void StateSet::insert(StateId s) {
  if (s >= universe_) {
    throw DomainError("state " + std::to_string(s) + " outside a set over " +
                      std::to_string(universe_) + " states");
  }
  words_[s >> 6] |= std::uint64_t{1} << (s & 63);
}

void StateSet::erase(StateId s) {
  if (s < universe_) words_[s >> 6] &= ~(std::uint64_t{1} << (s & 63));
}

std::size_t StateSet::count() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool StateSet::empty() const noexcept {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

bool StateSet::is_subset_of(const StateSet& other) const {
  check_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  }
  return true;
}

bool StateSet::intersects(const StateSet& other) const {
  check_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & other.words_[i]) != 0) return true;
  }
  return false;
}

StateSet& StateSet::operator|=(const StateSet& other) {
  check_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

StateSet& StateSet::operator&=(const StateSet& other) {
  check_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

StateSet& StateSet::operator-=(const StateSet& other) {
  check_universe(other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

StateSet StateSet::complement() const {
  StateSet out = *this;
  for (auto& w : out.words_) w = ~w;
  out.trim();
  return out;
}

std::vector<StateId> StateSet::members() const {
  std::vector<StateId> out;
  out.reserve(count());
  for_each([&](StateId s) { out.push_back(s); });
  return out;
}

std::string StateSet::to_bits() const {
  std::string bits(universe_, '0');
  for_each([&](StateId s) { bits[s] = '1'; });
  return bits;
}

void StateSet::check_universe(const StateSet& other) const {
  if (universe_ != other.universe_) {
    throw DomainError("state sets over different universes (" + std::to_string(universe_) +
                      " vs " + std::to_string(other.universe_) + ")");
  }
}

void StateSet::trim() noexcept {
  const std::size_t tail = universe_ & 63;
  if (tail != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

}  // namespace safemdp
