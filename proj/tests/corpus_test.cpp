#include <svmc/corpus.hpp>
#include <svmc/invariants.hpp>

#include <gtest/gtest.h>

#include <chrono>
#include <map>

using namespace svmc;

namespace
{
	const std::map<std::string, std::pair<Scope, bool>> kExpected = {
		{ "vm_startup", { Scope::External, true } },
		{ "vm_launch", { Scope::Internal, true } },
		{ "vm_secure_channel", { Scope::External, true } },
		{ "vm_trust_evidence", { Scope::External, true } },
		{ "vm_suspend_resume_original", { Scope::External, false } },
		{ "vm_suspend_resume_fixed", { Scope::External, true } },
		{ "vm_mem_update", { Scope::Internal, true } },
		{ "vm_terminate", { Scope::Internal, true } },
		{ "cloudmonatt_external", { Scope::External, true } },
		{ "evidence_collection", { Scope::Internal, true } },
		{ "property_interpretation", { Scope::Internal, true } },
		{ "health_checking", { Scope::Internal, true } },
	};
}

TEST( Corpus, ListsTwelveEntries )
{
	auto es = list_entries();
	ASSERT_EQ( es.size(), kExpected.size() );
	for ( auto& e : es )
	{
		ASSERT_TRUE( kExpected.count( e.name ) ) << e.name;
		EXPECT_EQ( e.scope, kExpected.at( e.name ).first ) << e.name;
		EXPECT_EQ( e.expected.pass, kExpected.at( e.name ).second ) << e.name;
	}
}

TEST( Corpus, VerdictsBudgetsAndBenignCommit )
{
	for ( auto& e : list_entries() )
	{
		auto m = load( e.name );
		EXPECT_FALSE( benign_run( m ).steps.empty() ) << e.name;
		auto t0 = std::chrono::steady_clock::now();
		auto v = verify( m );
		double secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
		EXPECT_LT( secs, 10.0 ) << e.name;
		EXPECT_LT( v.search.reachable_state_count, 1000000u ) << e.name;
		EXPECT_EQ( v.search.resource_status, ResourceStatus::Completed ) << e.name;
		if ( e.expected.pass ) EXPECT_EQ( v.kind, VerdictKind::Pass ) << e.name;
		else
		{
			ASSERT_EQ( v.kind, VerdictKind::Fail ) << e.name;
			EXPECT_EQ( v.violations.front().invariant, e.expected.invariant ) << e.name;
		}
	}
}

TEST( Corpus, SuspendResumeOriginalIsReplay )
{
	auto v = verify( load( "vm_suspend_resume_original" ) );
	ASSERT_EQ( v.kind, VerdictKind::Fail );
	EXPECT_EQ( v.violations.front().mechanism, Mechanism::Replay );
}

TEST( Corpus, EvidenceCollectionSubjects )
{
	std::set<std::string> ids;
	for ( auto& s : load( "evidence_collection" ).subjects ) ids.insert( s.id );
	EXPECT_EQ( ids, ( std::set<std::string>{ "network", "attestation_client", "monitor_module", "trust_module" } ) );
}

TEST( Corpus, UnknownModel )
{
	try
	{
		load( "nonexistent" );
		FAIL() << "expected E_UNKNOWN_MODEL";
	}
	catch ( const ModelError& e )
	{
		EXPECT_EQ( e.code, "E_UNKNOWN_MODEL" );
	}
	EXPECT_FALSE( corpus_source( "nonexistent" ) );
}

TEST( Corpus, ReconstructionsAreMarked )
{
	for ( auto& e : list_entries() )
		if ( e.name == "vm_secure_channel" || e.name == "vm_trust_evidence" || e.name == "vm_mem_update" || e.name == "vm_terminate" ||
		     e.name == "vm_suspend_resume_fixed" || e.name == "property_interpretation" || e.name == "health_checking" )
			EXPECT_TRUE( e.reconstruction ) << e.name;
}

TEST( Corpus, LaunchModelsEveryStep )
{
	auto src = std::string( *corpus_source( "vm_launch" ) );
	for ( auto step : { "FIND_FREE", "PROTECT_PT", "PROTECT_CIP", "PROTECT_PAGES", "RECORD" } )
		EXPECT_NE( src.find( step ), std::string::npos ) << step;
}
