#include "oracles.hpp"

#include <svmc/ablation.hpp>
#include <svmc/corpus.hpp>

#include <gtest/gtest.h>

#include <algorithm>

using namespace svmc;

namespace
{
	std::map<std::string, Necessity> necessity( const AblationReport& a )
	{
		std::map<std::string, Necessity> out;
		for ( auto& p : a.preconditions ) out[ p.id ] = p.necessity;
		return out;
	}

	void expect_replayable( const ProtocolModel& m, const PreconditionResult& p )
	{
		ASSERT_TRUE( p.witness ) << p.id;
		auto en = precondition_ids( m );
		en.erase( p.id );
		Engine e( apply_preconditions( m, en ) );
		auto s = e.replay( p.witness->trace );
		ASSERT_TRUE( s ) << p.id;
		const Step* via = p.witness->trace.steps.empty() ? nullptr : &p.witness->trace.steps.back();
		auto fs = e.check( *s, via );
		EXPECT_TRUE( std::any_of( fs.begin(), fs.end(), [ & ]( const Finding& f ) { return f.invariant == p.witness->invariant; } ) ) << p.id;
	}
}

TEST( Ablation, CloudmonattAllNecessary )
{
	auto m = load( "cloudmonatt_external" );
	auto a = ablate( m, AblationMode::LeaveOneOut );
	ASSERT_TRUE( a.baseline_pass );
	for ( auto& p : a.preconditions )
	{
		EXPECT_EQ( p.necessity, Necessity::Necessary ) << p.id;
		expect_replayable( m, p );
	}
	EXPECT_EQ( a.preconditions.size(), 3u );
}

TEST( Ablation, EvidenceCollectionMinimalSet )
{
	auto m = load( "evidence_collection" );
	auto a = ablate( m, AblationMode::Exhaustive );
	ASSERT_TRUE( a.baseline_pass );
	ASSERT_EQ( a.minimal_sets.size(), 1u );
	EXPECT_EQ( a.minimal_sets.front(), ( std::set<std::string>{ "C1", "C2", "C3" } ) );
	for ( auto& p : a.preconditions ) expect_replayable( m, p );
}

TEST( Ablation, HealthCheckingOnlyPolicyValidation )
{
	auto a = ablate( load( "health_checking" ), AblationMode::LeaveOneOut );
	auto n = necessity( a );
	EXPECT_EQ( n.at( "C1" ), Necessity::Necessary );
	for ( auto id : { "C2", "C3", "C4", "C5" } ) EXPECT_EQ( n.at( id ), Necessity::Removable ) << id;
}

TEST( Ablation, DuplicatedPreconditionIsRemovableAlone )
{
	auto m = load( "evidence_collection" );
	auto dup = m.preconditions.front();
	dup.id = "C4";
	m.preconditions.push_back( dup );
	m.expected_necessary.reset();
	auto n = necessity( ablate( m, AblationMode::LeaveOneOut ) );
	EXPECT_EQ( n.at( m.preconditions.front().id ), Necessity::Removable );
	EXPECT_EQ( n.at( "C4" ), Necessity::Removable );
}

TEST( Ablation, TooManyForExhaustive )
{
	auto m = load( "evidence_collection" );
	for ( int i = 4; i <= 13; i++ )
	{
		auto p = m.preconditions.front();
		p.id = "C" + std::to_string( i );
		m.preconditions.push_back( p );
	}
	try
	{
		ablate( m, AblationMode::Exhaustive );
		FAIL() << "expected E_TOO_MANY_PRECONDITIONS";
	}
	catch ( const ModelError& e )
	{
		EXPECT_EQ( e.code, "E_TOO_MANY_PRECONDITIONS" );
	}
}

TEST( Ablation, FailingBaselineStopsEarly )
{
	auto a = ablate( load( "vm_suspend_resume_original" ), AblationMode::LeaveOneOut );
	EXPECT_FALSE( a.baseline_pass );
	EXPECT_TRUE( a.preconditions.empty() );
}

TEST( Ablation, TrustIsMonotoneAlongChains )
{
	oracle::Rng rng( 3 );
	for ( const char* name : { "vm_startup", "cloudmonatt_external", "evidence_collection", "vm_trust_evidence", "health_checking" } )
	{
		auto m = load( name );
		auto idset = precondition_ids( m );
		std::vector<std::string> ids( idset.begin(), idset.end() );
		for ( int chain = 0; chain < 3; chain++ )
		{
			std::shuffle( ids.begin(), ids.end(), rng );
			std::set<std::string> en;
			bool passed = false;
			for ( size_t k = 0; k <= ids.size(); k++ )
			{
				if ( k ) en.insert( ids[ k - 1 ] );
				EngineLimits lim;
				lim.max_states = 50000;
				auto v = verify( apply_preconditions( m, en ), lim );
				if ( v.kind == VerdictKind::Pass ) passed = true;
				else if ( v.kind == VerdictKind::Fail ) EXPECT_FALSE( passed ) << name << " fails after passing at " << k;
			}
			EXPECT_TRUE( passed ) << name;
		}
	}
}
