#include <svmc/report.hpp>

#include <sstream>

namespace svmc
{
	using nlohmann::json;

	static Digest unhex( const std::string& s )
	{
		Digest d{};
		for ( size_t i = 0; i < d.size() && 2 * i + 1 < s.size(); i++ )
			d[ i ] = uint8_t( std::stoi( s.substr( 2 * i, 2 ), nullptr, 16 ) );
		return d;
	}

	json trace_to_json( const Trace& t )
	{
		json a = json::array();
		for ( auto& e : t.entries ) a.push_back( { { "fingerprint", hex( e.fingerprint ) }, { "step", e.step } } );
		return a;
	}

	static Trace trace_from_json( const json& j )
	{
		Trace t;
		for ( auto& e : j ) t.entries.push_back( { unhex( e.at( "fingerprint" ).get<std::string>() ), e.at( "step" ).get<std::string>() } );
		return t;
	}

	std::string trace_text( const Trace& t )
	{
		std::ostringstream o;
		for ( size_t i = 0; i < t.entries.size(); i++ )
		{
			o << "  " << i << ". [" << hex( t.entries[ i ].fingerprint ).substr( 0, 12 ) << "] ";
			o << ( i == 0 ? std::string( "initial state" ) : t.entries[ i ].step ) << "\n";
		}
		return o.str();
	}

	json verdict_to_json( const Verdict& v )
	{
		json vs = json::array();
		for ( auto& x : v.violations )
			vs.push_back( {
				{ "invariant", x.invariant },
				{ "mechanism", mechanism_name( x.mechanism ) },
				{ "slot", x.slot },
				{ "explanation", x.explanation },
				{ "trace", trace_to_json( x.trace ) },
			} );
		auto& s = v.search;
		return {
			{ "kind", verdict_name( v.kind ) },
			{ "note", v.note },
			{ "sessions", v.sessions },
			{ "violations", vs },
			{ "search", {
				{ "reachable_states", s.reachable_state_count },
				{ "transitions", s.transition_count },
				{ "commit_states", s.commit_state_count },
				{ "deadlocks", s.deadlock_count },
				{ "max_depth", s.max_depth_seen },
				{ "resource_status", s.resource_status == ResourceStatus::Completed ? "completed" : "budget-exceeded" },
				{ "resource_note", s.resource_note },
			} },
		};
	}

	Verdict verdict_from_json( const json& j )
	{
		Verdict v;
		auto k = j.at( "kind" ).get<std::string>();
		v.kind = k == "pass" ? VerdictKind::Pass : k == "fail" ? VerdictKind::Fail : VerdictKind::Inconclusive;
		v.note = j.at( "note" ).get<std::string>();
		v.sessions = j.at( "sessions" ).get<uint32_t>();
		for ( auto& x : j.at( "violations" ) )
		{
			Violation vi;
			vi.invariant = x.at( "invariant" ).get<std::string>();
			vi.mechanism = *mechanism_from( x.at( "mechanism" ).get<std::string>() );
			vi.slot = x.at( "slot" ).get<std::string>();
			vi.explanation = x.at( "explanation" ).get<std::string>();
			vi.trace = trace_from_json( x.at( "trace" ) );
			v.violations.push_back( std::move( vi ) );
		}
		auto& s = j.at( "search" );
		v.search.reachable_state_count = s.at( "reachable_states" ).get<size_t>();
		v.search.transition_count = s.at( "transitions" ).get<size_t>();
		v.search.commit_state_count = s.at( "commit_states" ).get<size_t>();
		v.search.deadlock_count = s.at( "deadlocks" ).get<size_t>();
		v.search.max_depth_seen = s.at( "max_depth" ).get<size_t>();
		v.search.resource_status = s.at( "resource_status" ).get<std::string>() == "completed" ? ResourceStatus::Completed : ResourceStatus::BudgetExceeded;
		v.search.resource_note = s.at( "resource_note" ).get<std::string>();
		v.search.violations = v.violations;
		return v;
	}

	json report_to_json( const RunReport& r )
	{
		return {
			{ "schema", kReportSchema },
			{ "engine_version", kEngineVersion },
			{ "model", r.model },
			{ "verdict", verdict_to_json( r.verdict ) },
			{ "parameters", {
				{ "max_states", r.limits.max_states },
				{ "max_depth", r.limits.max_depth },
				{ "sessions", r.verdict.sessions },
				{ "fab_depth", r.limits.fab_depth },
				{ "workers", r.limits.workers },
			} },
			{ "wall_seconds", r.wall_seconds },
		};
	}

	std::string report_text( const RunReport& r )
	{
		std::ostringstream o;
		auto& v = r.verdict;
		o << r.model << ": " << verdict_name( v.kind );
		if ( !v.note.empty() ) o << " (" << v.note << ")";
		o << "\n";
		o << "  states " << v.search.reachable_state_count << ", transitions " << v.search.transition_count
		  << ", commit states " << v.search.commit_state_count << ", deadlocks " << v.search.deadlock_count << "\n";
		o << "  sessions " << v.sessions << ", fab-depth " << r.limits.fab_depth << ", max-states " << r.limits.max_states
		  << ", max-depth " << r.limits.max_depth << "\n";
		char buf[ 32 ];
		std::snprintf( buf, sizeof( buf ), "%.3f", r.wall_seconds );
		o << "  time " << buf << "s\n";
		for ( auto& x : v.violations )
		{
			o << "violation " << x.invariant << " (" << mechanism_name( x.mechanism ) << ") at " << x.slot << "\n";
			o << "  " << x.explanation << "\n";
			o << trace_text( x.trace );
		}
		return o.str();
	}

	json ablation_to_json( const std::string& model, const AblationReport& a )
	{
		json pre = json::array();
		for ( auto& p : a.preconditions )
		{
			json e = { { "id", p.id }, { "necessity", necessity_name( p.necessity ) } };
			if ( p.witness )
				e[ "witness" ] = { { "invariant", p.witness->invariant }, { "mechanism", mechanism_name( p.witness->mechanism ) },
				                   { "slot", p.witness->slot }, { "trace", trace_to_json( p.witness->trace ) } };
			pre.push_back( e );
		}
		json runs = json::array();
		for ( auto& r : a.runs )
			runs.push_back( { { "enabled", r.enabled }, { "verdict", verdict_name( r.verdict ) }, { "states", r.states } } );
		json mins = json::array();
		for ( auto& s : a.minimal_sets ) mins.push_back( s );
		return {
			{ "schema", kReportSchema },
			{ "model", model },
			{ "baseline", verdict_name( a.baseline.verdict ) },
			{ "preconditions", pre },
			{ "minimal_sets", mins },
			{ "runs", runs },
		};
	}

	std::string ablation_text( const std::string& model, const AblationReport& a )
	{
		std::ostringstream o;
		o << model << ": baseline " << verdict_name( a.baseline.verdict ) << ", " << a.runs.size() << " runs\n";
		for ( auto& p : a.preconditions )
		{
			o << "  " << p.id << " " << necessity_name( p.necessity );
			if ( p.witness ) o << " (" << p.witness->invariant << ", " << mechanism_name( p.witness->mechanism ) << " at " << p.witness->slot << ")";
			o << "\n";
		}
		for ( auto& s : a.minimal_sets )
		{
			o << "  minimal {";
			bool first = true;
			for ( auto& id : s ) { o << ( first ? "" : ", " ) << id; first = false; }
			o << "}\n";
		}
		return o.str();
	}
};
