#include "oracles.hpp"

#include <svmc/knowledge.hpp>
#include <svmc/modelfmt.hpp>

#include <gtest/gtest.h>

using namespace svmc;

TEST( Term, StructuralEqualityAndOrder )
{
	auto a = Term::tuple( { Term::atom( "A" ), Term::nonce( "N", "alice" ) } );
	auto b = Term::tuple( { Term::atom( "A" ), Term::nonce( "N", "alice" ) } );
	EXPECT_EQ( a, b );
	EXPECT_EQ( a.hash_value(), b.hash_value() );
	EXPECT_NE( a, Term::tuple( { Term::atom( "A" ), Term::nonce( "N", "bob" ) } ) );
	EXPECT_EQ( Term::compare( a, b ), 0 );
	EXPECT_EQ( a.depth(), 2 );
	EXPECT_TRUE( a.ground() );
	EXPECT_FALSE( Term::hash( Term::var( "x" ) ).ground() );
}

TEST( Term, KeyKindsAreChecked )
{
	EXPECT_THROW( Term::enc( Term::atom( "M" ), Term::priv_key( "K" ) ), std::invalid_argument );
	EXPECT_THROW( Term::sig( Term::atom( "M" ), Term::pub_key( "K" ) ), std::invalid_argument );
	EXPECT_NO_THROW( Term::enc( Term::atom( "M" ), Term::var( "k" ) ) );
	EXPECT_EQ( *decryption_key( Term::pub_key( "K" ) ), Term::priv_key( "K" ) );
	EXPECT_EQ( *decryption_key( Term::sym_key( "K" ) ), Term::sym_key( "K" ) );
	EXPECT_FALSE( decryption_key( Term::priv_key( "K" ) ) );
}

TEST( Term, PrintParseRoundTrip )
{
	oracle::Rng rng( 7 );
	for ( int i = 0; i < 2000; i++ )
	{
		Term t = oracle::random_term( rng, 4 );
		auto back = parse_term( to_string( t, "owner" ), "owner" );
		ASSERT_TRUE( back ) << to_string( t );
		EXPECT_EQ( *back, t ) << to_string( t );
	}
}

TEST( Term, SessionsAndStaleness )
{
	auto t = Term::tuple( { Term::nonce( "N", "a" ), Term::atom( "X" ) } );
	auto t2 = instantiate( t, 2 );
	EXPECT_EQ( t2.children()[ 0 ].session(), 2u );
	EXPECT_FALSE( has_stale_nonce( t2, 2 ) );
	EXPECT_TRUE( has_stale_nonce( instantiate( t, 1 ), 2 ) );
	EXPECT_EQ( instantiate( t2, 3 ), t2 );
}

TEST( Term, SubstituteAndSubtermAt )
{
	auto t = Term::tuple( { Term::var( "x" ), Term::hash( Term::var( "y" ) ) } );
	auto s = substitute( t, []( const std::string& v ) -> std::optional<Term>
	{
		if ( v == "x" ) return Term::atom( "A" );
		return std::nullopt;
	} );
	EXPECT_EQ( s.children()[ 0 ], Term::atom( "A" ) );
	EXPECT_FALSE( s.ground() );
	std::vector<int> p{ 1, 0 };
	EXPECT_EQ( *subterm_at( s, p ), Term::var( "y" ) );
	std::vector<int> bad{ 3 };
	EXPECT_FALSE( subterm_at( s, bad ) );
}

TEST( Knowledge, EncryptionHidesPayloadUntilKeyKnown )
{
	auto m = Term::nonce( "M", "a" );
	auto kz = Term::sym_key( "K_Z" );
	auto c = Term::enc( m, kz );
	auto k1 = closure( { c }, {} );
	EXPECT_FALSE( k1.can_derive( m ) );
	auto k2 = closure( { c, kz }, {} );
	EXPECT_TRUE( k2.can_derive( m ) );
	auto k0 = closure( std::vector<Term>{}, {} );
	EXPECT_FALSE( k0.can_derive( m ) );
}

TEST( Knowledge, AsymmetricDecryptionNeedsPrivateKey )
{
	auto m = Term::atom( "M" );
	auto c = Term::enc( m, Term::pub_key( "K" ) );
	EXPECT_FALSE( closure( { c, Term::pub_key( "K" ) }, {} ).contains( m ) );
	EXPECT_TRUE( closure( { c, Term::priv_key( "K" ) }, {} ).contains( m ) );
	// key learned after the ciphertext
	auto k = closure( { c }, {} ).extend( std::vector<Term>{ Term::priv_key( "K" ) } );
	EXPECT_TRUE( k.contains( m ) );
}

TEST( Knowledge, SignaturesRevealPayloadNotKey )
{
	auto s = Term::sig( Term::atom( "M" ), Term::priv_key( "K" ) );
	auto k = closure( { s }, {} );
	EXPECT_TRUE( k.contains( Term::atom( "M" ) ) );
	EXPECT_FALSE( k.can_derive( Term::priv_key( "K" ) ) );
	EXPECT_FALSE( k.can_derive( Term::sig( Term::atom( "N" ), Term::priv_key( "K" ) ) ) );
}

TEST( Knowledge, FabDepthBoundsConstruction )
{
	auto a = Term::atom( "A" );
	auto k = closure( { a }, {}, 2 );
	EXPECT_TRUE( k.can_derive( Term::hash( Term::hash( a ) ) ) );
	EXPECT_FALSE( k.can_derive( Term::hash( Term::hash( Term::hash( a ) ) ) ) );
	EXPECT_TRUE( k.can_derive( Term::atom( "adv.x" ) ) );
	EXPECT_THROW( closure( std::vector<Term>{ a }, {}, -1 ), std::invalid_argument );
}

TEST( Knowledge, ClosureCapRaises )
{
	std::vector<Term> base;
	for ( int i = 0; i < 50; i++ ) base.push_back( Term::atom( "A" + std::to_string( i ) ) );
	EXPECT_THROW( closure( base, {}, 2, 10 ), ResourceError );
}

TEST( Knowledge, ClosureMatchesNaiveFixpoint )
{
	oracle::Rng rng( 11 );
	for ( int round = 0; round < 200; round++ )
	{
		std::vector<Term> base, universe;
		for ( int i = std::uniform_int_distribution<int>( 0, 6 )( rng ); i > 0; i-- ) base.push_back( oracle::random_term( rng, 3 ) );
		for ( int i = 0; i < 4; i++ ) universe.push_back( oracle::random_term( rng, 3 ) );
		universe.insert( universe.end(), base.begin(), base.end() );

		auto k = closure( base, universe );
		auto want = oracle::naive_closure( base, universe );
		std::set<Term> got( k.terms().begin(), k.terms().end() );
		ASSERT_EQ( got, want ) << "round " << round;

		for ( int i = 0; i < 20; i++ )
		{
			Term probe = oracle::random_term( rng, 4 );
			EXPECT_EQ( k.can_derive( probe ), oracle::naive_derivable( want, probe, k.fab_depth() ) ) << to_string( probe );
		}

		auto again = closure( k.sorted(), universe );
		EXPECT_EQ( std::set<Term>( again.terms().begin(), again.terms().end() ), got );

		auto more = base;
		more.push_back( oracle::random_term( rng, 3 ) );
		auto bigger = closure( more, universe );
		for ( auto& t : got ) EXPECT_TRUE( bigger.contains( t ) );
	}
}
