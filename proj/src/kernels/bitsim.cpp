#include <algorithm>
#include <array>

#include "lutscope/bitsim.hpp"

namespace lutscope {

BitSim::BitSim(const Design& d, std::size_t words)
    : d_(d), words_(words), values_(d.nets().size() * words, 0), inits_(d.luts().size()) {
  for (std::size_t i = 0; i < inits_.size(); ++i) inits_[i] = d.luts()[i].init;
  auto one = net(Design::kConst1);
  std::fill(one.begin(), one.end(), ~std::uint64_t{0});
  for (const auto& c : d.consts()) {
    auto v = net(c.out);
    std::fill(v.begin(), v.end(), c.value ? ~std::uint64_t{0} : 0);
  }
}

void BitSim::evaluate() { evaluate(d_.lut_order()); }

void BitSim::evaluate(std::span<const std::uint32_t> luts) {
  std::array<const std::uint64_t*, 6> in{};
  for (auto li : luts) {
    const auto& l = d_.luts()[li];
    for (unsigned i = 0; i < l.k; ++i) in[i] = values_.data() + l.in[i] * words_;
    lut_eval_words(inits_[li], l.k, in.data(), values_.data() + l.out * words_, words_);
  }
}

} // namespace lutscope
