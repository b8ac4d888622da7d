#include "binwam/dict.hpp"

namespace binwam {

void Dictionary::rehash(std::size_t capacity) {
  std::vector<Entry> old = std::move(slots_);
  slots_.assign(capacity, Entry{});
  count_ = 0;
  bool was_sealed = sealed_;
  sealed_ = false;
  for (const Entry& e : old)
    if (e.used) put(e.k1, e.k2, e.value, e.mark);
  sealed_ = was_sealed;
}

void Dictionary::put(Word k1, Word k2, Word value, Mark mark) {
  if (count_ * 4 >= slots_.size() * 3) rehash(slots_.size() * 2);
  std::size_t mask = slots_.size() - 1;
  std::size_t i = hash(k1, k2) & mask;
  while (slots_[i].used) {
    if (slots_[i].k1 == k1 && slots_[i].k2 == k2) {
      if (sealed_ && slots_[i].mark == Mark::Kernel)
        throw ProtectionError("attempt to overwrite a kernel dictionary entry");
      slots_[i].value = value;
      slots_[i].mark = mark;
      return;
    }
    i = (i + 1) & mask;
  }
  slots_[i] = Entry{k1, k2, value, mark, true};
  ++count_;
}

std::optional<Word> Dictionary::get(Word k1, Word k2) const {
  std::size_t mask = slots_.size() - 1;
  std::size_t i = hash(k1, k2) & mask;
  while (slots_[i].used) {
    if (slots_[i].k1 == k1 && slots_[i].k2 == k2) return slots_[i].value;
    i = (i + 1) & mask;
  }
  return std::nullopt;
}

void Dictionary::clear_user() {
  // Rebuild rather than tombstone: user sweeps are rare and the table stays
  // probe-clean.
  std::vector<Entry> old = std::move(slots_);
  slots_.assign(old.size(), Entry{});
  count_ = 0;
  bool was_sealed = sealed_;
  sealed_ = false;
  for (const Entry& e : old)
    if (e.used && e.mark == Mark::Kernel) put(e.k1, e.k2, e.value, e.mark);
  sealed_ = was_sealed;
}

}  // namespace binwam
