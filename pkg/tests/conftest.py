import pytest

HELLO_WORLD = """\
# foo is a simple audio sample, oscillator or video file
foo.src = youtube('http://www.youtube.com/watch?v=XXX')
# defining the video positions (in seconds) to be played
foo.pos = [10, 20, 35]
# the durations (as time ratios) to play each position
foo.cdur = [1/2, 1/4, 1/8, 1/16, 1]
"""

OPERATORS = """\
# we can use operators
foo.pos = [1, 2, 3] reverse        # result is [3, 2, 1]
foo.pos = [1, 2, 3] inverse        # result is [1, 0, -1]
foo.pos = [1, 2, 3] transpose +2   # result is [3, 4, 5]

# and even list comprehension
foo.pos = [1/i+1 for i in [1, 2, 3]]

# or combine both
foo.pos = [1/i+1 for i in [1, 2, 3]] reverse
"""


@pytest.fixture
def hello_world():
    return HELLO_WORLD


@pytest.fixture
def operators_listing():
    return OPERATORS


def pytest_runtest_makereport(item, call):
    # the acceptance suite reports one line per criterion
    if call.when == "call" and item.fspath.basename == "test_acceptance.py":
        status = "PASS" if call.excinfo is None else "FAIL"
        print(f"\n[acceptance] {item.name}: {status}", flush=True)
