const sum = require('../sum');

test('small numbers', () => expect(sum(1, 2)).toBe(3));
test('negatives', () => expect(sum(-1, -2)).toBe(-3));
test('zero', () => expect(sum(0, 0)).toBe(0));
