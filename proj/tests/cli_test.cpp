#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace
{
	struct Run
	{
		int code = -1;
		std::string out;
	};

	Run svm( const std::string& args )
	{
		std::string cmd = std::string( SVM_CLI_PATH ) + " " + args + " 2>&1";
		Run r;
		FILE* p = popen( cmd.c_str(), "r" );
		if ( !p ) return r;
		std::array<char, 4096> buf;
		size_t n;
		while ( ( n = fread( buf.data(), 1, buf.size(), p ) ) > 0 ) r.out.append( buf.data(), n );
		int st = pclose( p );
		r.code = WIFEXITED( st ) ? WEXITSTATUS( st ) : -1;
		return r;
	}
}

TEST( Cli, ReplayFailureExitsOne )
{
	auto r = svm( "verify corpus:vm_suspend_resume_original" );
	EXPECT_EQ( r.code, 1 ) << r.out;
	EXPECT_NE( r.out.find( "replay" ), std::string::npos ) << r.out;
	EXPECT_NE( r.out.find( "attacker" ), std::string::npos ) << r.out;
}

TEST( Cli, PassExitsZero )
{
	auto r = svm( "verify corpus:cloudmonatt_external" );
	EXPECT_EQ( r.code, 0 ) << r.out;
}

TEST( Cli, MissingFileExitsThree )
{
	auto r = svm( "verify missing.svm" );
	EXPECT_EQ( r.code, 3 );
	EXPECT_NE( r.out.find( "E_FILE_NOT_FOUND" ), std::string::npos ) << r.out;
}

TEST( Cli, UnknownCorpusEntry )
{
	auto r = svm( "verify corpus:nonexistent" );
	EXPECT_EQ( r.code, 3 );
	EXPECT_NE( r.out.find( "E_UNKNOWN_MODEL" ), std::string::npos ) << r.out;
}

TEST( Cli, BudgetGivesInconclusive )
{
	EXPECT_EQ( svm( "verify corpus:vm_startup --max-states 5" ).code, 2 );
}

TEST( Cli, BadUsage )
{
	EXPECT_EQ( svm( "verify" ).code, 3 );
	EXPECT_EQ( svm( "frobnicate" ).code, 3 );
	EXPECT_EQ( svm( "verify corpus:vm_startup --format yaml" ).code, 3 );
}

TEST( Cli, JsonReport )
{
	auto r = svm( "verify corpus:vm_startup --format json --workers 2" );
	ASSERT_EQ( r.code, 0 ) << r.out;
	auto j = nlohmann::json::parse( r.out );
	EXPECT_EQ( j.at( "verdict" ).at( "kind" ), "pass" );
	EXPECT_EQ( j.at( "parameters" ).at( "workers" ), 2 );
}

TEST( Cli, ListAndCheck )
{
	auto r = svm( "list --format json" );
	ASSERT_EQ( r.code, 0 );
	EXPECT_EQ( nlohmann::json::parse( r.out ).size(), 12u );
	EXPECT_EQ( svm( "check corpus:vm_terminate" ).code, 0 );
	EXPECT_EQ( svm( std::string( "check " ) + SVMC_SOURCE_DIR + "/corpus/hyperwall/vm_launch.svm" ).code, 0 );
}

TEST( Cli, AblateAndTrace )
{
	auto a = svm( "ablate corpus:evidence_collection --exhaustive" );
	EXPECT_EQ( a.code, 0 ) << a.out;
	EXPECT_NE( a.out.find( "necessary" ), std::string::npos ) << a.out;
	auto t = svm( "trace corpus:vm_suspend_resume_original --invariant I_resume" );
	EXPECT_EQ( t.code, 1 ) << t.out;
	EXPECT_NE( t.out.find( "I_resume" ), std::string::npos );
	EXPECT_EQ( svm( "trace corpus:vm_startup --invariant NOPE" ).code, 3 );
}

TEST( Cli, Audit )
{
	auto r = svm( "audit corpus:vm_startup --invariant I1" );
	ASSERT_EQ( r.code, 0 ) << r.out;
	EXPECT_NE( r.out.find( "?cert  cert-chain" ), std::string::npos ) << r.out;
	EXPECT_NE( r.out.find( "?sig  freshness" ), std::string::npos ) << r.out;
}
