#include <svmc/modelfmt.hpp>

#include <charconv>
#include <map>
#include <set>
#include <stdexcept>

namespace svmc
{
	namespace
	{
		enum class Tok : uint8_t { Ident, Var, String, LParen, RParen, Comma, At, Eq, Neq, End };

		struct Token
		{
			Tok kind;
			std::string text;
			int column;
		};

		struct SyntaxError
		{
			std::string code;
			std::string message;
			int column;
		};

		const std::set<std::string, std::less<>> kReserved = {
			"nonce", "key", "pub", "priv", "enc", "sig", "cert", "hash", "tuple", "func",
			"on", "goto", "send", "when", "and", "expect",
		};

		bool ident_char( char c )
		{
			return ( c >= 'a' && c <= 'z' ) || ( c >= 'A' && c <= 'Z' ) || ( c >= '0' && c <= '9' ) || c == '_' || c == '-' || c == '.';
		}

		std::vector<Token> lex( std::string_view line )
		{
			std::vector<Token> out;
			size_t i = 0;
			while ( i < line.size() )
			{
				char c = line[ i ];
				int col = int( i ) + 1;
				if ( c == ' ' || c == '\t' || c == '\r' ) { i++; continue; }
				if ( c == '#' ) break;
				if ( c == '"' )
				{
					std::string s;
					i++;
					bool closed = false;
					while ( i < line.size() )
					{
						char d = line[ i++ ];
						if ( d == '"' ) { closed = true; break; }
						if ( d == '\\' )
						{
							if ( i >= line.size() ) break;
							char e = line[ i++ ];
							if ( e == 'n' ) s += '\n';
							else if ( e == '"' || e == '\\' ) s += e;
							else throw SyntaxError{ "E_LEX", "bad escape in string", col };
						}
						else s += d;
					}
					if ( !closed ) throw SyntaxError{ "E_LEX", "unterminated string", col };
					out.push_back( { Tok::String, std::move( s ), col } );
					continue;
				}
				if ( c == '?' )
				{
					size_t j = i + 1;
					while ( j < line.size() && ident_char( line[ j ] ) ) j++;
					if ( j == i + 1 ) throw SyntaxError{ "E_LEX", "empty variable name", col };
					out.push_back( { Tok::Var, std::string( line.substr( i + 1, j - i - 1 ) ), col } );
					i = j;
					continue;
				}
				if ( ident_char( c ) )
				{
					size_t j = i;
					while ( j < line.size() && ident_char( line[ j ] ) ) j++;
					out.push_back( { Tok::Ident, std::string( line.substr( i, j - i ) ), col } );
					i = j;
					continue;
				}
				if ( c == '(' ) { out.push_back( { Tok::LParen, "(", col } ); i++; continue; }
				if ( c == ')' ) { out.push_back( { Tok::RParen, ")", col } ); i++; continue; }
				if ( c == ',' ) { out.push_back( { Tok::Comma, ",", col } ); i++; continue; }
				if ( c == '@' ) { out.push_back( { Tok::At, "@", col } ); i++; continue; }
				if ( c == '=' && i + 1 < line.size() && line[ i + 1 ] == '=' ) { out.push_back( { Tok::Eq, "==", col } ); i += 2; continue; }
				if ( c == '!' && i + 1 < line.size() && line[ i + 1 ] == '=' ) { out.push_back( { Tok::Neq, "!=", col } ); i += 2; continue; }
				throw SyntaxError{ "E_LEX", "unexpected character", col };
			}
			out.push_back( { Tok::End, "", int( line.size() ) + 1 } );
			return out;
		}

		bool valid_name( std::string_view s )
		{
			if ( s.empty() ) return false;
			char c = s[ 0 ];
			if ( !( ( c >= 'a' && c <= 'z' ) || ( c >= 'A' && c <= 'Z' ) || c == '_' ) ) return false;
			for ( char d : s )
				if ( !ident_char( d ) || d == '.' ) return false;
			return true;
		}

		struct Line
		{
			std::vector<Token> toks;
			size_t pos = 0;
			std::string context;  // default nonce owner

			const Token& peek() const { return toks[ pos ]; }
			bool at_end() const { return peek().kind == Tok::End; }
			const Token& next() { const Token& t = toks[ pos ]; if ( t.kind != Tok::End ) pos++; return t; }

			[[noreturn]] void fail( const std::string& msg ) const { throw SyntaxError{ "E_SYNTAX", msg, peek().column }; }

			bool accept_word( std::string_view w )
			{
				if ( peek().kind == Tok::Ident && peek().text == w ) { pos++; return true; }
				return false;
			}
			void expect_word( std::string_view w )
			{
				if ( !accept_word( w ) ) fail( "expected '" + std::string( w ) + "'" );
			}
			void expect( Tok k, const char* what )
			{
				if ( peek().kind != k ) fail( std::string( "expected " ) + what );
				pos++;
			}
			std::string name( const char* what )
			{
				if ( peek().kind != Tok::Ident || !valid_name( peek().text ) || kReserved.count( peek().text ) )
					fail( std::string( "expected " ) + what );
				return next().text;
			}
			std::string string( const char* what )
			{
				if ( peek().kind != Tok::String ) fail( std::string( "expected " ) + what );
				return next().text;
			}
			Slot slot()
			{
				if ( peek().kind != Tok::Var ) fail( "expected ?slot" );
				auto s = Slot::parse( peek().text );
				if ( !s || !valid_name( s->var ) ) fail( "bad slot" );
				pos++;
				return *s;
			}
			void done()
			{
				if ( !at_end() ) fail( "unexpected '" + peek().text + "'" );
			}

			std::vector<Term> term_list( Tok close, int depth )
			{
				std::vector<Term> xs;
				if ( peek().kind == close ) return xs;
				xs.push_back( term( depth ) );
				while ( peek().kind == Tok::Comma )
				{
					pos++;
					xs.push_back( term( depth ) );
				}
				return xs;
			}

			Term term( int depth = 0 )
			{
				if ( depth > 64 ) throw SyntaxError{ "E_TERM_DEPTH", "term nested too deeply", peek().column };
				const Token& t = peek();
				if ( t.kind == Tok::Var )
				{
					if ( !valid_name( t.text ) ) fail( "bad variable name" );
					pos++;
					return Term::var( t.text );
				}
				if ( t.kind != Tok::Ident ) fail( "expected a term" );
				const std::string w = t.text;
				auto bin = [ & ]( auto make ) -> Term
				{
					pos++;
					expect( Tok::LParen, "'('" );
					Term a = term( depth + 1 );
					expect( Tok::Comma, "','" );
					Term b = term( depth + 1 );
					expect( Tok::RParen, "')'" );
					try { return make( a, b ); }
					catch ( const std::invalid_argument& e ) { throw SyntaxError{ "E_BAD_KEY", e.what(), t.column }; }
				};
				if ( w == "nonce" )
				{
					pos++;
					std::string id = name( "nonce name" );
					std::string owner = context;
					if ( peek().kind == Tok::At )
					{
						pos++;
						owner = name( "nonce owner" );
					}
					if ( owner.empty() ) fail( "nonce needs an owner here (nonce N@subject)" );
					return Term::nonce( id, owner );
				}
				if ( w == "key" ) { pos++; return Term::sym_key( name( "key name" ) ); }
				if ( w == "pub" ) { pos++; return Term::pub_key( name( "key name" ) ); }
				if ( w == "priv" ) { pos++; return Term::priv_key( name( "key name" ) ); }
				if ( w == "enc" ) return bin( []( Term a, Term b ) { return Term::enc( a, b ); } );
				if ( w == "sig" || w == "cert" ) return bin( []( Term a, Term b ) { return Term::sig( a, b ); } );
				if ( w == "hash" )
				{
					pos++;
					expect( Tok::LParen, "'('" );
					Term a = term( depth + 1 );
					expect( Tok::RParen, "')'" );
					return Term::hash( a );
				}
				if ( w == "tuple" )
				{
					pos++;
					expect( Tok::LParen, "'('" );
					auto xs = term_list( Tok::RParen, depth + 1 );
					expect( Tok::RParen, "')'" );
					return Term::tuple( std::move( xs ) );
				}
				if ( w == "func" )
				{
					pos++;
					std::string f = name( "function name" );
					expect( Tok::LParen, "'('" );
					auto xs = term_list( Tok::RParen, depth + 1 );
					expect( Tok::RParen, "')'" );
					return Term::func( f, std::move( xs ) );
				}
				return Term::atom( name( "atom" ) );
			}

			std::vector<GuardClause> guard()
			{
				std::vector<GuardClause> g;
				do
				{
					GuardClause c{ term(), Term::atom( "_" ) };
					if ( peek().kind == Tok::Eq ) c.negated = false;
					else if ( peek().kind == Tok::Neq ) c.negated = true;
					else fail( "expected '==' or '!='" );
					pos++;
					c.rhs = term();
					g.push_back( std::move( c ) );
				} while ( accept_word( "and" ) );
				return g;
			}
		};

		struct Parser
		{
			std::string file;
			ProtocolModel m;
			std::vector<Diagnostic> diags;
			std::map<std::string, std::pair<int, int>> spans;  // location -> (line, col)
			Subject* subj = nullptr;
			StateNode* state = nullptr;
			InvariantDecl* inv = nullptr;
			bool header = false, version = false;

			void diag( const std::string& code, const std::string& msg, int line, int col )
			{
				if ( diags.size() < 100 ) diags.push_back( { code, {}, msg, file, line, col } );
			}

			void statement( Line& l, int lineno )
			{
				const Token& first = l.peek();
				if ( first.kind != Tok::Ident ) l.fail( "expected a keyword" );
				const std::string kw = first.text;

				if ( !version )
				{
					if ( kw != "svm-format-version" ) throw SyntaxError{ "E_FORMAT_VERSION", "first line must be 'svm-format-version 1'", first.column };
					l.next();
					if ( l.peek().kind != Tok::Ident || l.peek().text != "1" ) throw SyntaxError{ "E_FORMAT_VERSION", "unsupported format version", l.peek().column };
					l.next();
					l.done();
					version = true;
					return;
				}
				if ( !header )
				{
					if ( kw != "model" ) l.fail( "expected model header" );
					l.next();
					m.name = l.name( "model name" );
					l.expect_word( "phase" );
					m.phase = l.name( "phase" );
					l.expect_word( "scope" );
					if ( l.accept_word( "external" ) ) m.scope = Scope::External;
					else if ( l.accept_word( "internal" ) ) m.scope = Scope::Internal;
					else l.fail( "expected external or internal" );
					l.done();
					header = true;
					spans[ "model" ] = { lineno, 1 };
					return;
				}

				l.next();
				auto top = [ & ]() { subj = nullptr; state = nullptr; };

				if ( kw == "sessions" )
				{
					auto& t = l.next();
					uint32_t v = 0;
					auto [ p, ec ] = std::from_chars( t.text.data(), t.text.data() + t.text.size(), v );
					if ( t.kind != Tok::Ident || ec != std::errc{} || p != t.text.data() + t.text.size() ) l.fail( "expected a session count" );
					m.sessions = v;
					l.done();
				}
				else if ( kw == "note" )
				{
					m.notes.push_back( l.string( "note text" ) );
					l.done();
				}
				else if ( kw == "public" )
				{
					top();
					l.context.clear();
					auto xs = l.term_list( Tok::End, 0 );
					if ( xs.empty() ) l.fail( "expected terms" );
					m.public_terms.insert( m.public_terms.end(), xs.begin(), xs.end() );
					canonicalize( m.public_terms );
					l.done();
				}
				else if ( kw == "expect" )
				{
					ExpectedVerdict e;
					if ( l.accept_word( "pass" ) ) e.pass = true;
					else if ( l.accept_word( "fail" ) )
					{
						e.pass = false;
						e.invariant = l.name( "invariant id" );
						if ( !l.at_end() )
						{
							auto mech = mechanism_from( l.peek().text );
							if ( !mech ) l.fail( "expected a mechanism" );
							l.next();
							e.mechanism = mech;
						}
					}
					else l.fail( "expected pass or fail" );
					l.done();
					m.expected = e;
				}
				else if ( kw == "expect-necessary" )
				{
					std::vector<std::string> ids;
					while ( !l.at_end() ) ids.push_back( l.name( "precondition id" ) );
					m.expected_necessary = ids;
				}
				else if ( kw == "channel" )
				{
					top();
					Channel c;
					c.id = l.name( "channel name" );
					c.secure = l.accept_word( "secure" );
					l.done();
					spans[ "channel " + c.id ] = { lineno, 1 };
					m.channels.push_back( c );
				}
				else if ( kw == "subject" )
				{
					top();
					Subject s;
					s.id = l.name( "subject name" );
					if ( l.accept_word( "trusted" ) ) s.trusted = true;
					else if ( l.accept_word( "untrusted" ) )
					{
						s.trusted = false;
						while ( !l.at_end() )
						{
							auto c = capability_from( l.peek().text );
							if ( !c || l.peek().kind != Tok::Ident ) l.fail( "expected a capability" );
							l.next();
							s.capabilities.insert( *c );
						}
					}
					else l.fail( "expected trusted or untrusted" );
					l.done();
					spans[ "subject " + s.id ] = { lineno, 1 };
					m.subjects.push_back( std::move( s ) );
					subj = &m.subjects.back();
				}
				else if ( kw == "knows" )
				{
					if ( !subj ) l.fail( "'knows' outside a subject" );
					l.context = subj->id;
					auto xs = l.term_list( Tok::End, 0 );
					if ( xs.empty() ) l.fail( "expected terms" );
					l.done();
					subj->private_knowledge.insert( subj->private_knowledge.end(), xs.begin(), xs.end() );
					canonicalize( subj->private_knowledge );
				}
				else if ( kw == "states" )
				{
					if ( !subj ) l.fail( "'states' outside a subject" );
					l.done();
				}
				else if ( kw == "state" )
				{
					if ( !subj ) l.fail( "'state' outside a subject" );
					StateNode st;
					st.id = l.name( "state name" );
					if ( l.accept_word( "start" ) ) st.kind = StateKind::Start;
					else if ( l.accept_word( "commit" ) ) st.kind = StateKind::Commit;
					if ( l.accept_word( "check" ) )
					{
						do st.on_enter_checks.push_back( l.name( "invariant id" ) );
						while ( !l.at_end() );
					}
					l.done();
					spans[ "subject " + subj->id + "/state " + st.id ] = { lineno, 1 };
					subj->states.push_back( std::move( st ) );
					state = &subj->states.back();
				}
				else if ( kw == "on" || kw == "goto" )
				{
					if ( !state ) l.fail( "transition outside a state" );
					l.context = subj->id;
					Transition tr;
					if ( kw == "on" )
					{
						std::string ch = l.name( "channel" );
						tr.trigger = MessageAction{ ch, l.term() };
						l.expect_word( "goto" );
					}
					tr.target = l.name( "target state" );
					if ( l.accept_word( "send" ) )
					{
						std::string ch = l.name( "channel" );
						tr.emit = MessageAction{ ch, l.term() };
					}
					if ( l.accept_word( "when" ) ) tr.guard = l.guard();
					l.done();
					spans[ "subject " + subj->id + "/state " + state->id + "/transition " + std::to_string( state->transitions.size() ) ] = { lineno, 1 };
					state->transitions.push_back( std::move( tr ) );
				}
				else if ( kw == "tag" )
				{
					top();
					ValueTag t;
					if ( l.accept_word( "conf" ) ) t.tag = TagKind::Conf;
					else if ( l.accept_word( "inte" ) ) t.tag = TagKind::Inte;
					else l.fail( "expected conf or inte" );
					t.subject = l.name( "subject" );
					t.slot = l.slot();
					l.done();
					spans[ "tag " + t.subject + " ?" + t.slot.str() ] = { lineno, 1 };
					m.tags.push_back( std::move( t ) );
				}
				else if ( kw == "precondition" )
				{
					top();
					Precondition p;
					p.id = l.name( "precondition id" );
					if ( l.accept_word( "trust" ) ) { p.effect = EffectKind::TrustSubject; p.target = l.name( "subject" ); }
					else if ( l.accept_word( "secure" ) ) { p.effect = EffectKind::SecureChannel; p.target = l.name( "channel" ); }
					else if ( l.accept_word( "private" ) )
					{
						p.effect = EffectKind::GrantPrivate;
						p.target = l.name( "subject" );
						l.context = p.target;
						p.term = l.term();
					}
					else l.fail( "expected trust, private or secure" );
					l.done();
					spans[ "precondition " + p.id ] = { lineno, 1 };
					m.preconditions.push_back( std::move( p ) );
				}
				else if ( kw == "invariant" )
				{
					top();
					InvariantDecl d;
					d.id = l.name( "invariant id" );
					if ( l.accept_word( "integrity" ) )
					{
						d.kind = InvariantKind::Integrity;
						d.subject = l.name( "subject" );
						while ( l.peek().kind == Tok::Var ) d.slots.push_back( l.slot() );
						if ( l.accept_word( "expect" ) )
						{
							l.context = d.subject;
							d.expect = l.guard();
						}
					}
					else if ( l.accept_word( "confidentiality" ) )
					{
						d.kind = InvariantKind::Confidentiality;
						if ( l.accept_word( "secret" ) )
						{
							l.context.clear();
							d.secret = l.term();
						}
						else
						{
							d.subject = l.name( "subject" );
							d.slots.push_back( l.slot() );
						}
					}
					else l.fail( "expected integrity or confidentiality" );
					l.done();
					spans[ "invariant " + d.id ] = { lineno, 1 };
					m.invariants.push_back( std::move( d ) );
					inv = &m.invariants.back();
				}
				else if ( kw == "description" )
				{
					if ( !inv ) l.fail( "'description' without an invariant" );
					inv->description = l.string( "description text" );
					l.done();
				}
				else
					throw SyntaxError{ "E_SYNTAX", "unknown keyword '" + kw + "'", first.column };

				if ( kw != "description" && kw != "note" ) { if ( kw != "invariant" ) inv = nullptr; }
			}

			void run( std::string_view text, bool check )
			{
				int lineno = 0;
				size_t i = 0;
				bool any = false;
				while ( i <= text.size() )
				{
					size_t j = text.find( '\n', i );
					if ( j == std::string_view::npos ) j = text.size();
					std::string_view raw = text.substr( i, j - i );
					i = j + 1;
					lineno++;
					try
					{
						Line l{ lex( raw ) };
						if ( l.at_end() ) { if ( j == text.size() ) break; continue; }
						any = true;
						statement( l, lineno );
					}
					catch ( const SyntaxError& e )
					{
						diag( e.code, e.message, lineno, e.column );
						if ( !version || !header ) return;
					}
					if ( j == text.size() ) break;
				}
				if ( !any ) { diag( "E_EMPTY_MODEL", "input contains no model", 1, 1 ); return; }
				if ( !version ) { diag( "E_FORMAT_VERSION", "missing 'svm-format-version 1'", 1, 1 ); return; }
				if ( !header ) { diag( "E_SYNTAX", "missing model header", lineno, 1 ); return; }
				if ( !check || !diags.empty() ) return;
				for ( auto& d : validate( m ) )
				{
					auto loc = d.location;
					auto it = spans.find( loc );
					while ( it == spans.end() )
					{
						auto k = loc.rfind( '/' );
						if ( k == std::string::npos ) break;
						loc = loc.substr( 0, k );
						it = spans.find( loc );
					}
					d.file = file;
					d.line = it != spans.end() ? it->second.first : 1;
					d.column = it != spans.end() ? it->second.second : 1;
					diags.push_back( std::move( d ) );
				}
			}
		};

		ParseResult do_parse( std::string_view text, std::string file, bool check )
		{
			Parser p;
			p.file = std::move( file );
			p.run( text, check );
			ParseResult r;
			if ( p.diags.empty() ) r.model = std::move( p.m );
			r.diagnostics = std::move( p.diags );
			return r;
		}

		// ---------------------------------------------------------------

		std::string quote( const std::string& s )
		{
			std::string o = "\"";
			for ( char c : s )
			{
				if ( c == '"' || c == '\\' ) { o += '\\'; o += c; }
				else if ( c == '\n' ) o += "\\n";
				else o += c;
			}
			return o + "\"";
		}

		std::string term_list( const std::vector<Term>& xs, std::string_view ctx )
		{
			std::string s;
			for ( size_t i = 0; i < xs.size(); i++ )
			{
				if ( i ) s += ", ";
				s += to_string( xs[ i ], ctx );
			}
			return s;
		}

		std::string guard_str( const std::vector<GuardClause>& g, std::string_view ctx )
		{
			std::string s;
			for ( size_t i = 0; i < g.size(); i++ )
			{
				if ( i ) s += " and ";
				s += to_string( g[ i ].lhs, ctx ) + ( g[ i ].negated ? " != " : " == " ) + to_string( g[ i ].rhs, ctx );
			}
			return s;
		}
	};

	ParseResult parse( std::string_view text, std::string file ) { return do_parse( text, std::move( file ), true ); }
	ParseResult parse_unchecked( std::string_view text, std::string file ) { return do_parse( text, std::move( file ), false ); }

	std::optional<Term> parse_term( std::string_view text, std::string_view context )
	{
		try
		{
			Line l{ lex( text ) };
			l.context = std::string( context );
			Term t = l.term();
			l.done();
			return t;
		}
		catch ( const SyntaxError& ) { return std::nullopt; }
	}

	std::string serialize( const ProtocolModel& m )
	{
		std::string o;
		o += kFormatHeader;
		o += "\n";
		o += "model " + m.name + " phase " + m.phase + " scope " + ( m.scope == Scope::External ? "external" : "internal" ) + "\n";
		o += "sessions " + std::to_string( m.sessions ) + "\n";
		for ( auto& n : m.notes ) o += "note " + quote( n ) + "\n";
		if ( !m.public_terms.empty() ) o += "public " + term_list( m.public_terms, {} ) + "\n";
		if ( m.expected )
		{
			if ( m.expected->pass ) o += "expect pass\n";
			else
			{
				o += "expect fail " + m.expected->invariant;
				if ( m.expected->mechanism ) o += std::string( " " ) + mechanism_name( *m.expected->mechanism );
				o += "\n";
			}
		}
		if ( m.expected_necessary )
		{
			o += "expect-necessary";
			for ( auto& id : *m.expected_necessary ) o += " " + id;
			o += "\n";
		}
		for ( auto& c : m.channels ) o += "channel " + c.id + ( c.secure ? " secure" : "" ) + "\n";
		for ( auto& s : m.subjects )
		{
			o += "\nsubject " + s.id;
			if ( s.trusted ) o += " trusted";
			else
			{
				o += " untrusted";
				for ( auto c : s.capabilities ) o += std::string( " " ) + capability_name( c );
			}
			o += "\n";
			if ( !s.private_knowledge.empty() ) o += "  knows " + term_list( s.private_knowledge, s.id ) + "\n";
			o += "  states\n";
			for ( auto& st : s.states )
			{
				o += "    state " + st.id;
				if ( st.kind == StateKind::Start ) o += " start";
				if ( st.kind == StateKind::Commit ) o += " commit";
				if ( !st.on_enter_checks.empty() )
				{
					o += " check";
					for ( auto& c : st.on_enter_checks ) o += " " + c;
				}
				o += "\n";
				for ( auto& tr : st.transitions )
				{
					o += "      ";
					if ( tr.trigger ) o += "on " + tr.trigger->channel + " " + to_string( tr.trigger->term, s.id ) + " ";
					o += "goto " + tr.target;
					if ( tr.emit ) o += " send " + tr.emit->channel + " " + to_string( tr.emit->term, s.id );
					if ( !tr.guard.empty() ) o += " when " + guard_str( tr.guard, s.id );
					o += "\n";
				}
			}
		}
		if ( !m.tags.empty() ) o += "\n";
		for ( auto& t : m.tags ) o += std::string( "tag " ) + ( t.tag == TagKind::Conf ? "conf " : "inte " ) + t.subject + " ?" + t.slot.str() + "\n";
		if ( !m.preconditions.empty() ) o += "\n";
		for ( auto& p : m.preconditions )
		{
			o += "precondition " + p.id;
			switch ( p.effect )
			{
				case EffectKind::TrustSubject: o += " trust " + p.target; break;
				case EffectKind::SecureChannel: o += " secure " + p.target; break;
				case EffectKind::GrantPrivate: o += " private " + p.target + " " + to_string( *p.term, p.target ); break;
			}
			o += "\n";
		}
		if ( !m.invariants.empty() ) o += "\n";
		for ( auto& d : m.invariants )
		{
			o += "invariant " + d.id;
			if ( d.kind == InvariantKind::Integrity )
			{
				o += " integrity " + d.subject;
				for ( auto& s : d.slots ) o += " ?" + s.str();
				if ( !d.expect.empty() ) o += " expect " + guard_str( d.expect, d.subject );
			}
			else if ( d.secret ) o += " confidentiality secret " + to_string( *d.secret, {} );
			else o += " confidentiality " + d.subject + " ?" + d.slots.front().str();
			o += "\n";
			if ( !d.description.empty() ) o += "  description " + quote( d.description ) + "\n";
		}
		return o;
	}
};
