import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
FIXTURES = TESTS_DIR / "fixtures"
MODELS_DIR = TESTS_DIR.parent / "models"

sys.path.insert(0, str(TESTS_DIR))

from gqlshield.config import SecurityConfig  # noqa: E402
from gqlshield.gql import parse_schema  # noqa: E402

SOCIAL_SDL = """
type Query {
  me: User
  user(name: String): User
  search(q: String, filter: Filter): [Result]
  node(id: ID): Node
}
type Mutation {
  updateProfile(bio: String, links: [String]): User
  runReport(spec: ReportSpec): String
}
type User {
  id: ID
  name: String
  email: String
  friends(first: Int): [User]
  posts(limit: Int): [Post]
}
type Post {
  id: ID
  title: String
  body: String
  author: User
  comments: [Comment]
}
type Comment {
  id: ID
  text: String
  author: User
}
union Result = User | Post
interface Node {
  id: ID
}
input Filter {
  names: [String]
  tag: String
}
input ReportSpec {
  query: String
  urls: [String]
}
"""


@pytest.fixture(scope="session")
def social_schema():
    return parse_schema(SOCIAL_SDL)


@pytest.fixture()
def permissive_config():
    return SecurityConfig(
        complexity_threshold=1e9, max_depth=1000, max_aliases=100000,
        max_batch=1000, max_directives=100000, max_circular_revisits=1000,
        max_payload_estimate=10**9, allow_introspection=True)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def models_dir():
    return MODELS_DIR
