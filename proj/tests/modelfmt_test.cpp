#include "oracles.hpp"

#include <svmc/corpus.hpp>
#include <svmc/modelfmt.hpp>

#include <gtest/gtest.h>

using namespace svmc;

namespace
{
	const char* kMinimal =
		"svm-format-version 1\n"
		"model tiny phase runtime scope external\n"
		"sessions 1\n"
		"subject a trusted\n"
		"  states\n"
		"    state S start\n";
}

TEST( Format, StartupSubjects )
{
	auto src = corpus_source( "vm_startup" );
	ASSERT_TRUE( src );
	auto r = parse( *src, "hyperwall/vm_startup.svm" );
	ASSERT_TRUE( r.ok() );
	std::set<std::string> ids;
	for ( auto& s : r.model->subjects ) ids.insert( s.id );
	EXPECT_EQ( ids, ( std::set<std::string>{ "customer", "network_hypervisor", "processor", "tp1", "tp2" } ) );
}

TEST( Format, EmptyInput )
{
	auto r = parse( "" );
	EXPECT_FALSE( r.ok() );
	ASSERT_FALSE( r.diagnostics.empty() );
	EXPECT_EQ( r.diagnostics.front().code, "E_EMPTY_MODEL" );
}

TEST( Format, DiagnosticsCarryPosition )
{
	auto r = parse( "svm-format-version 1\nmodel x phase p scope external\nsubject a trusted\n  states\n    state S start\n      goto S send c tuple(\n" );
	ASSERT_FALSE( r.ok() );
	EXPECT_GE( r.diagnostics.front().line, 1 );
	EXPECT_GE( r.diagnostics.front().column, 1 );
}

TEST( Format, MinimalDocument )
{
	auto r = parse_unchecked( kMinimal );
	ASSERT_TRUE( r.ok() ) << ( r.diagnostics.empty() ? "" : r.diagnostics.front().str() );
	EXPECT_EQ( r.model->subjects.size(), 1u );
	EXPECT_EQ( parse_unchecked( serialize( *r.model ) ).model, r.model );
}

TEST( Format, CorpusRoundTrip )
{
	for ( auto& e : list_entries() )
	{
		auto m = load( e.name );
		auto text = serialize( m );
		auto r = parse( text );
		ASSERT_TRUE( r.ok() ) << e.name << ": " << r.diagnostics.front().str();
		EXPECT_EQ( *r.model, m ) << e.name;
		EXPECT_EQ( serialize( *r.model ), text ) << e.name;
	}
}

TEST( Format, GeneratedRoundTrip )
{
	oracle::Rng rng( 2024 );
	for ( int i = 0; i < 1000; i++ )
	{
		auto m = oracle::random_model( rng );
		auto text = serialize( m );
		auto r = parse_unchecked( text );
		ASSERT_TRUE( r.ok() ) << text << "\n" << r.diagnostics.front().str();
		ASSERT_EQ( *r.model, m ) << text;
	}
}

TEST( Format, EqualModelsSerializeIdentically )
{
	auto a = load( "vm_launch" );
	auto b = load( "vm_launch" );
	EXPECT_EQ( serialize( a ), serialize( b ) );
}

TEST( Format, UnknownHeaderRejected )
{
	auto r = parse( "svm-format-version 9\nmodel x phase p scope external\n" );
	ASSERT_FALSE( r.ok() );
	EXPECT_EQ( r.diagnostics.front().code, "E_FORMAT_VERSION" );
}

TEST( Format, FuzzedInputNeverThrows )
{
	oracle::Rng rng( 99 );
	std::vector<std::string> seeds;
	for ( auto& e : list_entries() ) seeds.emplace_back( *corpus_source( e.name ) );
	size_t accepted = 0;
	for ( int i = 0; i < 100000; i++ )
	{
		auto text = oracle::mutate( rng, seeds[ size_t( i ) % seeds.size() ] );
		ParseResult r;
		ASSERT_NO_THROW( r = parse( text ) ) << text;
		if ( r.ok() ) accepted++;
		else ASSERT_FALSE( r.diagnostics.empty() );
	}
	RecordProperty( "accepted", int( accepted ) );
}
