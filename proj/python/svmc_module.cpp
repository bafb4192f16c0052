#include <svmc/ablation.hpp>
#include <svmc/corpus.hpp>
#include <svmc/modelfmt.hpp>
#include <svmc/report.hpp>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace svmc;

namespace
{
	EngineLimits limits_from( uint32_t sessions, size_t max_states, unsigned workers )
	{
		EngineLimits l;
		l.sessions = sessions;
		l.max_states = max_states;
		l.workers = workers;
		return l;
	}

	py::dict verdict_dict( const std::string& name, const Verdict& v )
	{
		py::dict d;
		d[ "model" ] = name;
		d[ "verdict" ] = verdict_name( v.kind );
		d[ "states" ] = v.search.reachable_state_count;
		d[ "sessions" ] = v.sessions;
		py::list vs;
		for ( auto& x : v.violations )
		{
			py::dict e;
			e[ "invariant" ] = x.invariant;
			e[ "mechanism" ] = mechanism_name( x.mechanism );
			e[ "slot" ] = x.slot;
			py::list steps;
			for ( size_t i = 1; i < x.trace.entries.size(); i++ ) steps.append( x.trace.entries[ i ].step );
			e[ "trace" ] = steps;
			vs.append( e );
		}
		d[ "violations" ] = vs;
		return d;
	}

	ProtocolModel parse_or_throw( const std::string& text )
	{
		auto r = parse( text, "<string>" );
		if ( !r.ok() ) throw ModelError( r.diagnostics.front().code, r.diagnostics.front().str() );
		return std::move( *r.model );
	}
}

PYBIND11_MODULE( _svmc, m )
{
	m.doc() = "symbolic security model checker";
	static py::exception<ModelError> model_error( m, "ModelError", PyExc_ValueError );
	py::register_exception_translator( []( std::exception_ptr p )
	{
		try { if ( p ) std::rethrow_exception( p ); }
		catch ( const ModelError& e ) { py::set_error( model_error, ( e.code + ": " + e.what() ).c_str() ); }
	} );

	m.def( "corpus_names", []
	{
		std::vector<std::string> out;
		for ( auto& e : list_entries() ) out.push_back( e.name );
		return out;
	} );
	m.def( "corpus_source", []( const std::string& name )
	{
		auto s = corpus_source( name );
		if ( !s ) throw ModelError( "E_UNKNOWN_MODEL", "no corpus model named " + name );
		return std::string( *s );
	} );
	m.def( "verify", []( const std::string& name, uint32_t sessions, size_t max_states, unsigned workers )
	{
		auto model = load( name );
		Verdict v;
		{
			py::gil_scoped_release nogil;
			v = verify( model, limits_from( sessions, max_states, workers ) );
		}
		return verdict_dict( model.name, v );
	}, py::arg( "name" ), py::arg( "sessions" ) = 0, py::arg( "max_states" ) = 1000000, py::arg( "workers" ) = 1 );
	m.def( "verify_text", []( const std::string& text, uint32_t sessions )
	{
		auto model = parse_or_throw( text );
		return verdict_dict( model.name, verify( model, limits_from( sessions, 1000000, 1 ) ) );
	}, py::arg( "text" ), py::arg( "sessions" ) = 0 );
	m.def( "round_trip", []( const std::string& text )
	{
		auto a = parse_or_throw( text );
		auto b = parse_or_throw( serialize( a ) );
		return a == b;
	} );
	m.def( "ablate", []( const std::string& name, bool exhaustive )
	{
		auto model = load( name );
		auto r = ablate( model, exhaustive ? AblationMode::Exhaustive : AblationMode::LeaveOneOut );
		py::dict d;
		for ( auto& p : r.preconditions ) d[ py::str( p.id ) ] = necessity_name( p.necessity );
		return d;
	}, py::arg( "name" ), py::arg( "exhaustive" ) = false );
	m.def( "discharge", []( const std::string& name, const std::string& invariant )
	{
		py::dict d;
		for ( auto& s : discharge_record( load( name ), invariant ) ) d[ py::str( s.slot ) ] = discharge_name( s.mechanism );
		return d;
	} );
}
