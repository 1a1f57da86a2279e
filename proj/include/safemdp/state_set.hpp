#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace safemdp {

using StateId = std::uint32_t;

/// Fixed-universe bitset over the states 0..universe-1 of one MDP.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(std::size_t universe);
  StateSet(std::size_t universe, std::initializer_list<StateId> members);

  static StateSet full(std::size_t universe);
  static StateSet from_members(std::size_t universe, const std::vector<StateId>& members);
  /// Parses a string of '0'/'1' characters, state 0 first.
  static StateSet from_bits(const std::string& bits);

  std::size_t universe() const noexcept { return universe_; }

  bool contains(StateId s) const noexcept {
    return s < universe_ && ((words_[s >> 6] >> (s & 63)) & 1u) != 0;
  }
  void insert(StateId s);
  void erase(StateId s);

  std::size_t count() const noexcept;
  bool empty() const noexcept;

  bool is_subset_of(const StateSet& other) const;
  bool intersects(const StateSet& other) const;

  StateSet& operator|=(const StateSet& other);
  StateSet& operator&=(const StateSet& other);
  /// Set difference.
  StateSet& operator-=(const StateSet& other);

  friend StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }
  friend StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
  friend StateSet operator-(StateSet a, const StateSet& b) { return a -= b; }
  StateSet complement() const;

  friend bool operator==(const StateSet& a, const StateSet& b) = default;

  std::vector<StateId> members() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t word = words_[w];
      while (word != 0) {
        const int bit = std::countr_zero(word);
        fn(static_cast<StateId>(w * 64 + static_cast<std::size_t>(bit)));
        word &= word - 1;
      }
    }
  }

  std::string to_bits() const;

 private:
  void check_universe(const StateSet& other) const;
  void trim() noexcept;

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace safemdp
