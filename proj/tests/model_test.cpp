#include <svmc/corpus.hpp>
#include <svmc/invariants.hpp>
#include <svmc/modelfmt.hpp>

#include <gtest/gtest.h>

#include <algorithm>

using namespace svmc;

namespace
{
	bool has_code( const std::vector<Diagnostic>& ds, const std::string& code )
	{
		return std::any_of( ds.begin(), ds.end(), [ & ]( const Diagnostic& d ) { return d.code == code; } );
	}

	const Subject& subject( const ProtocolModel& m, const std::string& id ) { return m.subjects[ m.subject_index( id ) ]; }
}

TEST( Validate, CorpusStartupIsClean )
{
	EXPECT_TRUE( validate( load( "vm_startup" ) ).empty() );
}

TEST( Validate, TwoStartStates )
{
	auto m = load( "vm_startup" );
	m.subjects[ m.subject_index( "processor" ) ].states.front().kind = StateKind::Start;
	EXPECT_TRUE( has_code( validate( m ), "E_MULTI_START" ) );
}

TEST( Validate, DanglingTagPath )
{
	auto m = load( "vm_startup" );
	m.tags.front().slot.var = "nosuch";
	EXPECT_TRUE( has_code( validate( m ), "E_BAD_TAG_PATH" ) );

	// a path into a leaf value is only detectable once the honest run binds it
	auto m2 = load( "vm_startup" );
	m2.tags.push_back( { "customer", { "n", { 7 } }, TagKind::Inte } );
	try
	{
		verify( m2 );
		FAIL() << "expected E_BAD_TAG_PATH";
	}
	catch ( const ModelError& e )
	{
		EXPECT_EQ( e.code, "E_BAD_TAG_PATH" );
	}
}

TEST( Validate, UnknownChannelAndState )
{
	auto m = load( "vm_startup" );
	auto& tr = m.subjects[ m.subject_index( "customer" ) ].states.front().transitions.front();
	tr.target = "NOWHERE";
	EXPECT_TRUE( has_code( validate( m ), "E_UNKNOWN_STATE" ) );
	tr.target = m.subjects[ m.subject_index( "customer" ) ].states[ 1 ].id;
	tr.trigger->channel = "nochan";
	EXPECT_TRUE( has_code( validate( m ), "E_UNKNOWN_CHANNEL" ) );
}

TEST( Preconditions, FullSetIsIdentity )
{
	auto m = load( "cloudmonatt_external" );
	auto r = apply_preconditions( m, { "C1", "C2", "C3" } );
	r.expected = m.expected;
	r.expected_necessary = m.expected_necessary;
	EXPECT_EQ( r, m );
}

TEST( Preconditions, DroppingTrustMakesSubjectAttacker )
{
	auto m = load( "cloudmonatt_external" );
	auto r = apply_preconditions( m, { "C1", "C2" } );
	EXPECT_FALSE( subject( r, "controller" ).trusted );
	EXPECT_EQ( subject( r, "controller" ).capabilities, all_capabilities() );
	EXPECT_TRUE( subject( r, "cloud_server" ).trusted );

	auto r2 = apply_preconditions( m, { "C2", "C3" } );
	EXPECT_FALSE( subject( r2, "cloud_server" ).trusted );
	EXPECT_TRUE( subject( r2, "controller" ).trusted );
}

TEST( Preconditions, DroppingSecureChannel )
{
	auto m = load( "evidence_collection" );
	auto r = apply_preconditions( m, { "C1", "C2" } );
	EXPECT_FALSE( r.channels[ r.channel_index( "mon_tm" ) ].secure );
}

TEST( Preconditions, OrderInsensitiveAndUnknownIdRejected )
{
	auto m = load( "health_checking" );
	EXPECT_EQ( apply_preconditions( m, { "C5", "C1", "C3" } ), apply_preconditions( m, { "C1", "C3", "C5" } ) );
	EXPECT_THROW( apply_preconditions( m, { "C9" } ), std::invalid_argument );
	EXPECT_EQ( precondition_ids( m ), ( std::set<std::string>{ "C1", "C2", "C3", "C4", "C5" } ) );
}

TEST( Model, StartAndCommitSubjects )
{
	auto m = load( "evidence_collection" );
	EXPECT_EQ( m.subjects[ start_subject( m ) ].id, "network" );
	EXPECT_EQ( m.subjects[ commit_subject( m ) ].id, "network" );
	auto ends = channel_endpoints( m, "mon_tm" );
	std::sort( ends.begin(), ends.end() );
	EXPECT_EQ( ends, ( std::vector<std::string>{ "monitor_module", "trust_module" } ) );
}

TEST( Model, SlotParse )
{
	auto s = Slot::parse( "x.1.0" );
	ASSERT_TRUE( s );
	EXPECT_EQ( s->var, "x" );
	EXPECT_EQ( s->path, ( std::vector<int>{ 1, 0 } ) );
	EXPECT_EQ( s->str(), "x.1.0" );
	EXPECT_FALSE( Slot::parse( "" ) );
}
