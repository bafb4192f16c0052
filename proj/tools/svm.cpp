// svm: command-line driver for the model checker
#include <svmc/ablation.hpp>
#include <svmc/corpus.hpp>
#include <svmc/modelfmt.hpp>
#include <svmc/report.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace svmc;

namespace
{
	constexpr int kExitUsage = 3;

	struct UserError
	{
		std::string code;
		std::string message;
	};

	ProtocolModel load_target( const std::string& target )
	{
		if ( target.rfind( "corpus:", 0 ) == 0 )
		{
			try { return load( target.substr( 7 ) ); }
			catch ( const ModelError& e ) { throw UserError{ e.code, e.what() }; }
		}
		std::ifstream in( target, std::ios::binary );
		if ( !in ) throw UserError{ "E_FILE_NOT_FOUND", "cannot open " + target };
		std::stringstream ss;
		ss << in.rdbuf();
		auto r = parse( ss.str(), target );
		if ( !r.ok() )
		{
			std::string msg;
			for ( auto& d : r.diagnostics ) msg += ( msg.empty() ? "" : "\n" ) + d.str();
			throw UserError{ r.diagnostics.front().code, msg };
		}
		return std::move( *r.model );
	}

	void report_error( const std::string& code, const std::string& message )
	{
		if ( message.find( code ) != std::string::npos ) std::cerr << "error: " << message << "\n";
		else std::cerr << "error: " << code << ": " << message << "\n";
	}

	int exit_for( VerdictKind k )
	{
		switch ( k )
		{
			case VerdictKind::Pass: return 0;
			case VerdictKind::Fail: return 1;
			case VerdictKind::Inconclusive: return 2;
		}
		return kExitUsage;
	}
}

int main( int argc, char** argv )
{
	CLI::App app{ "svm - symbolic security model checker" };
	app.require_subcommand( 1 );

	EngineLimits limits;
	uint32_t sessions = 0;
	std::string format = "text";
	auto engine_flags = [ & ]( CLI::App* sub )
	{
		sub->add_option( "--sessions", sessions, "protocol sessions (default: model metadata)" )->check( CLI::Range( 1, 8 ) );
		sub->add_option( "--fab-depth", limits.fab_depth, "attacker construction depth" )->check( CLI::Range( 0, 6 ) );
		sub->add_option( "--max-states", limits.max_states, "state budget" )->check( CLI::PositiveNumber );
		sub->add_option( "--max-depth", limits.max_depth, "depth budget" )->check( CLI::PositiveNumber );
		sub->add_option( "--workers", limits.workers, "exploration threads" )->check( CLI::Range( 1, 256 ) );
		sub->add_flag( "--all-violations", limits.all_violations, "keep exploring after the first violating depth" );
		sub->add_option( "--format", format, "text or json" )->check( CLI::IsMember( { "text", "json" } ) );
	};

	std::string target, invariant;
	bool exhaustive = false;

	auto* verify_cmd = app.add_subcommand( "verify", "verify a model file or corpus:NAME" );
	verify_cmd->add_option( "target", target )->required();
	engine_flags( verify_cmd );

	auto* ablate_cmd = app.add_subcommand( "ablate", "precondition necessity analysis" );
	ablate_cmd->add_option( "target", target )->required();
	ablate_cmd->add_flag( "--exhaustive", exhaustive, "try every subset" );
	engine_flags( ablate_cmd );

	auto* list_cmd = app.add_subcommand( "list", "list corpus models" );
	list_cmd->add_option( "--format", format )->check( CLI::IsMember( { "text", "json" } ) );

	auto* trace_cmd = app.add_subcommand( "trace", "print the shortest violating trace" );
	trace_cmd->add_option( "target", target )->required();
	trace_cmd->add_option( "--invariant", invariant )->required();
	engine_flags( trace_cmd );

	auto* check_cmd = app.add_subcommand( "check", "parse and validate only" );
	check_cmd->add_option( "target", target )->required();

	auto* audit_cmd = app.add_subcommand( "audit", "which check rejects tampering of each protected slot" );
	audit_cmd->add_option( "target", target )->required();
	audit_cmd->add_option( "--invariant", invariant )->required();
	audit_cmd->add_option( "--format", format )->check( CLI::IsMember( { "text", "json" } ) );

	try
	{
		app.parse( argc, argv );
	}
	catch ( const CLI::ParseError& e )
	{
		int rc = app.exit( e );
		return rc == 0 ? 0 : kExitUsage;
	}
	limits.sessions = sessions;

	try
	{
		if ( list_cmd->parsed() )
		{
			auto entries = list_entries();
			if ( format == "json" )
			{
				nlohmann::json a = nlohmann::json::array();
				for ( auto& e : entries )
					a.push_back( {
						{ "name", e.name }, { "path", e.path }, { "scope", e.scope == Scope::External ? "external" : "internal" },
						{ "phase", e.phase }, { "preconditions", e.preconditions },
						{ "expected", e.expected.pass ? "pass" : "fail" }, { "reconstruction", e.reconstruction },
					} );
				std::cout << a.dump( 2 ) << "\n";
			}
			else
				for ( auto& e : entries )
				{
					std::cout << e.name << "  " << ( e.scope == Scope::External ? "external" : "internal" ) << "  " << e.phase << "  expect "
					          << ( e.expected.pass ? "pass" : "fail " + e.expected.invariant ) << ( e.reconstruction ? "  (reconstruction)" : "" ) << "\n";
				}
			return 0;
		}

		auto m = load_target( target );

		if ( check_cmd->parsed() )
		{
			std::cout << m.name << ": ok (" << m.subjects.size() << " subjects, " << m.channels.size() << " channels, "
			          << m.preconditions.size() << " preconditions, " << m.invariants.size() << " invariants)\n";
			return 0;
		}

		if ( audit_cmd->parsed() )
		{
			auto rec = discharge_record( m, invariant );
			if ( format == "json" )
			{
				nlohmann::json a = nlohmann::json::array();
				for ( auto& d : rec ) a.push_back( { { "slot", d.slot }, { "mechanism", discharge_name( d.mechanism ) }, { "detail", d.detail } } );
				std::cout << nlohmann::json{ { "model", m.name }, { "invariant", invariant }, { "slots", a } }.dump( 2 ) << "\n";
			}
			else
				for ( auto& d : rec ) std::cout << "?" << d.slot << "  " << discharge_name( d.mechanism ) << "  (" << d.detail << ")\n";
			return 0;
		}

		if ( verify_cmd->parsed() || trace_cmd->parsed() )
		{
			if ( trace_cmd->parsed() && !m.invariant( invariant ) )
				throw UserError{ "E_UNKNOWN_INVARIANT", "model has no invariant " + invariant };
			auto t0 = std::chrono::steady_clock::now();
			RunReport r{ m.name, verify( m, limits ), limits };
			r.wall_seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();

			if ( trace_cmd->parsed() )
			{
				const Violation* hit = nullptr;
				for ( auto& v : r.verdict.violations )
					if ( v.invariant == invariant ) { hit = &v; break; }
				if ( format == "json" )
				{
					nlohmann::json j = { { "schema", kReportSchema }, { "model", m.name }, { "invariant", invariant } };
					if ( hit ) j[ "violation" ] = { { "mechanism", mechanism_name( hit->mechanism ) }, { "slot", hit->slot },
					                                { "explanation", hit->explanation }, { "trace", trace_to_json( hit->trace ) } };
					else j[ "violation" ] = nullptr;
					std::cout << j.dump( 2 ) << "\n";
				}
				else if ( hit )
				{
					std::cout << m.name << " " << invariant << " (" << mechanism_name( hit->mechanism ) << ") at " << hit->slot << "\n";
					std::cout << "  " << hit->explanation << "\n" << trace_text( hit->trace );
				}
				else std::cout << m.name << " " << invariant << ": no violation (" << verdict_name( r.verdict.kind ) << ")\n";
				return exit_for( r.verdict.kind );
			}

			if ( format == "json" ) std::cout << report_to_json( r ).dump( 2 ) << "\n";
			else std::cout << report_text( r );
			return exit_for( r.verdict.kind );
		}

		if ( ablate_cmd->parsed() )
		{
			auto a = ablate( m, exhaustive ? AblationMode::Exhaustive : AblationMode::LeaveOneOut, limits );
			if ( format == "json" ) std::cout << ablation_to_json( m.name, a ).dump( 2 ) << "\n";
			else std::cout << ablation_text( m.name, a );
			return exit_for( a.baseline.verdict );
		}
	}
	catch ( const UserError& e )
	{
		report_error( e.code, e.message );
		return kExitUsage;
	}
	catch ( const ModelError& e )
	{
		report_error( e.code, e.what() );
		return kExitUsage;
	}
	catch ( const std::invalid_argument& e )
	{
		std::cerr << "error: E_USAGE: " << e.what() << "\n";
		return kExitUsage;
	}
	return kExitUsage;
}
