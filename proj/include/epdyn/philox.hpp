#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// identified by (seed, stream id); draws are a pure function of the block
// counter, so parallel trajectories reproduce bit-for-bit.

#include <array>
#include <cstdint>

namespace epdyn
{

class Philox4x32
{
public:
	using Counter = std::array<std::uint32_t, 4>;
	using Key = std::array<std::uint32_t, 2>;

	static Counter block(Counter ctr, Key key) noexcept
	{
		for (int round = 0; round < 10; ++round)
		{
			if (round > 0)
			{
				key[0] += kWeyl0;
				key[1] += kWeyl1;
			}
			const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
			const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
			ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
			       static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
		}
		return ctr;
	}

private:
	static constexpr std::uint32_t kMul0 = 0xD2511F53u;
	static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
	static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
	static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Sequential view of one Philox stream: counter words 0-1 index the block,
/// words 2-3 carry the stream id, the key is the 64-bit seed.
class CounterRng
{
public:
	CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
		: key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
		  stream_(stream)
	{
	}

	std::uint64_t next_u64() noexcept
	{
		if (lane_ == 2)
		{
			refill();
		}
		const std::uint64_t out = (std::uint64_t{buf_[2 * lane_]} << 32) | buf_[2 * lane_ + 1];
		++lane_;
		return out;
	}

	/// Uniform integer in [0, bound), exact (rejection on the top zone).
	std::uint64_t uniform_below(std::uint64_t bound) noexcept
	{
		if (bound <= 1)
		{
			return 0;
		}
		const std::uint64_t limit = -bound % bound; // 2^64 mod bound
		for (;;)
		{
			const std::uint64_t x = next_u64();
			if (x >= limit)
			{
				return x % bound;
			}
		}
	}

	/// Uniform double in [0, 1) with 53 random bits.
	double uniform01() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

	[[nodiscard]] std::uint64_t blocks_used() const noexcept { return block_; }

private:
	void refill() noexcept
	{
		const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
		                              static_cast<std::uint32_t>(block_ >> 32),
		                              static_cast<std::uint32_t>(stream_),
		                              static_cast<std::uint32_t>(stream_ >> 32)};
		buf_ = Philox4x32::block(ctr, key_);
		++block_;
		lane_ = 0;
	}

	Philox4x32::Key key_;
	std::uint64_t stream_;
	std::uint64_t block_ = 0;
	Philox4x32::Counter buf_{};
	unsigned lane_ = 2;
};

} // namespace epdyn
