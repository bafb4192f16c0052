#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svmc
{
	enum class TermKind : uint8_t
	{
		Atom,
		Nonce,
		SymKey,
		PubKey,
		PrivKey,
		Enc,
		Sig,
		Hash,
		Tuple,
		Func,
		Var,
	};

	const char* kind_name( TermKind k );

	struct TermNode;

	// Immutable, shared symbolic term. Copies are cheap.
	//
	class Term
	{
	public:
		static Term atom( std::string name );
		static Term nonce( std::string id, std::string owner, uint32_t session = 0 );
		static Term sym_key( std::string id );
		static Term pub_key( std::string id );
		static Term priv_key( std::string id );
		static Term enc( Term payload, Term key );
		static Term sig( Term payload, Term key );
		static Term cert( Term subject, Term issuer ) { return sig( std::move( subject ), std::move( issuer ) ); }
		static Term hash( Term payload );
		static Term tuple( std::vector<Term> items );
		static Term func( std::string name, std::vector<Term> args );
		static Term var( std::string name );

		TermKind kind() const;
		const std::string& name() const;
		const std::string& owner() const;
		uint32_t session() const;
		std::span<const Term> children() const;
		const Term& payload() const { return children()[ 0 ]; }
		const Term& key() const { return children()[ 1 ]; }

		size_t hash_value() const;
		int depth() const;
		bool ground() const;
		bool is_leaf() const;
		bool is_key() const;

		friend bool operator==( const Term& a, const Term& b );
		friend bool operator<( const Term& a, const Term& b ) { return compare( a, b ) < 0; }
		static int compare( const Term& a, const Term& b );

		const TermNode* raw() const { return node_.get(); }

	private:
		explicit Term( std::shared_ptr<const TermNode> n ) : node_( std::move( n ) ) {}
		static Term make( TermKind k, std::string name, std::string owner, uint32_t session, std::vector<Term> ch );
		std::shared_ptr<const TermNode> node_;
	};

	struct TermNode
	{
		TermKind kind;
		std::string name;
		std::string owner;
		uint32_t session = 0;
		std::vector<Term> children;
		size_t hash = 0;
		int depth = 1;
		bool ground = true;
	};

	struct TermHash
	{
		size_t operator()( const Term& t ) const { return t.hash_value(); }
	};

	// Printing. Nonces owned by `context` omit the owner.
	//
	std::string to_string( const Term& t, std::string_view context = {} );

	// Key that decrypts Enc(., k), or nothing if k is not an encryption key.
	//
	std::optional<Term> decryption_key( const Term& k );

	// Replace every template nonce (session 0) with its session-s instance.
	//
	Term instantiate( const Term& t, uint32_t session );

	// Replace variables. lookup returns nothing to leave the variable in place.
	//
	Term substitute( const Term& t, const std::function<std::optional<Term>( const std::string& )>& lookup );

	void collect_vars( const Term& t, std::vector<std::string>& out );
	void for_each_subterm( const Term& t, const std::function<void( const Term& )>& fn );

	std::optional<Term> subterm_at( const Term& t, std::span<const int> path );

	// True if some nonce in t belongs to a session in [1, session).
	//
	bool has_stale_nonce( const Term& t, uint32_t session );

	// Attacker-fresh leaves are named with this prefix.
	//
	inline constexpr std::string_view kFreshPrefix = "adv.";
	bool is_attacker_fresh( const Term& t );
};

template<> struct std::hash<svmc::Term>
{
	size_t operator()( const svmc::Term& t ) const { return t.hash_value(); }
};
