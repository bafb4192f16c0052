#include <svmc/corpus.hpp>
#include <svmc/engine.hpp>
#include <svmc/modelfmt.hpp>

#include <mutex>

namespace svmc
{
	// generated at build time from corpus/*.svm
	struct EmbeddedModel
	{
		const char* name;
		const char* path;
		const char* text;
	};
	extern const EmbeddedModel kEmbeddedCorpus[];
	extern const size_t kEmbeddedCorpusSize;

	static const EmbeddedModel* find( std::string_view name )
	{
		for ( size_t i = 0; i < kEmbeddedCorpusSize; i++ )
			if ( name == kEmbeddedCorpus[ i ].name ) return &kEmbeddedCorpus[ i ];
		return nullptr;
	}

	std::optional<std::string_view> corpus_source( std::string_view name )
	{
		if ( auto* e = find( name ) ) return std::string_view( e->text );
		return std::nullopt;
	}

	ProtocolModel load( std::string_view name )
	{
		auto* e = find( name );
		if ( !e ) throw ModelError( "E_UNKNOWN_MODEL", "no corpus model named " + std::string( name ) );
		auto r = parse( e->text, std::string( "corpus/" ) + e->path );
		if ( !r.ok() ) throw ModelError( r.diagnostics.front().code, r.diagnostics.front().str() );
		return std::move( *r.model );
	}

	std::vector<CorpusEntry> list_entries()
	{
		static std::once_flag once;
		static std::vector<CorpusEntry> entries;
		std::call_once( once, []
		{
			for ( size_t i = 0; i < kEmbeddedCorpusSize; i++ )
			{
				auto m = load( kEmbeddedCorpus[ i ].name );
				CorpusEntry c;
				c.name = m.name;
				c.path = kEmbeddedCorpus[ i ].path;
				c.scope = m.scope;
				c.phase = m.phase;
				for ( auto& p : m.preconditions ) c.preconditions.push_back( p.id );
				if ( m.expected ) c.expected = *m.expected;
				c.expected_necessary = m.expected_necessary;
				c.provenance = m.notes;
				for ( auto& n : m.notes ) c.reconstruction = c.reconstruction || n.starts_with( "reconstruction" );
				entries.push_back( std::move( c ) );
			}
		} );
		return entries;
	}
};
