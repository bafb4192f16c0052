#pragma once
#include <svmc/term.hpp>

#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace svmc
{
	using TermSet = std::unordered_set<Term, TermHash>;

	inline constexpr size_t kDefaultClosureCap = 100000;
	inline constexpr int kDefaultFabDepth = 2;

	struct ResourceError : std::runtime_error
	{
		using std::runtime_error::runtime_error;
	};

	// Composite subterms of the model, shallowest first. Bounds synthesis.
	//
	struct Universe
	{
		std::vector<Term> composites;
	};
	std::shared_ptr<const Universe> make_universe( const std::vector<Term>& terms );

	class KnowledgeSet
	{
	public:
		bool contains( const Term& t ) const { return terms_.count( t ) != 0; }

		// Membership, or buildable from members and attacker atoms with at
		// most fab_depth fresh constructor levels.
		//
		bool can_derive( const Term& t ) const;

		const TermSet& terms() const { return terms_; }
		std::vector<Term> sorted() const;
		uint64_t generation() const { return generation_; }
		int fab_depth() const { return fab_depth_; }
		size_t size() const { return terms_.size(); }

		// New set with `more` added and re-closed.
		//
		KnowledgeSet extend( std::span<const Term> more ) const;

		friend KnowledgeSet closure( std::span<const Term>, std::shared_ptr<const Universe>, int, size_t );

	private:
		bool derive( const Term& t, int budget ) const;
		void add_all( std::span<const Term> more );

		TermSet terms_;
		std::vector<Term> locked_;  // Enc terms whose key is not known yet
		std::shared_ptr<const Universe> universe_;
		uint64_t generation_ = 0;
		int fab_depth_ = kDefaultFabDepth;
		size_t cap_ = kDefaultClosureCap;
	};

	KnowledgeSet closure( std::span<const Term> base, std::shared_ptr<const Universe> universe,
	                      int fab_depth = kDefaultFabDepth, size_t cap = kDefaultClosureCap );

	inline KnowledgeSet closure( const std::vector<Term>& base, const std::vector<Term>& universe,
	                             int fab_depth = kDefaultFabDepth, size_t cap = kDefaultClosureCap )
	{
		return closure( std::span<const Term>( base ), make_universe( universe ), fab_depth, cap );
	}

	inline bool can_derive( const KnowledgeSet& k, const Term& t ) { return k.can_derive( t ); }
};
