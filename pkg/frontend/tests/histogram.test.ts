import { describe, expect, it } from 'vitest'
import { binCenters, laplaceDensity, overlayHeight, pixelToBinCenter } from '../src/histogram'
import type { ComponentJson } from '../src/types'

const HIST = { edges: [0, 1, 2, 3, 4], counts: [5, 0, 7, 2] }

describe('binCenters', () => {
    it('midpoints of consecutive edges', () => {
        expect(binCenters(HIST.edges)).toEqual([0.5, 1.5, 2.5, 3.5])
    })

    it('empty histogram has no centers', () => {
        expect(binCenters([])).toEqual([])
    })
})

describe('pixelToBinCenter', () => {
    it('maps a pixel to the center of its bin', () => {
        // 400px wide, 4 bins -> 100px per bin; pixel 250 is bin 2
        expect(pixelToBinCenter(250, 400, HIST)).toBe(2.5)
    })

    it('first and last pixels map to outer bins', () => {
        expect(pixelToBinCenter(0, 400, HIST)).toBe(0.5)
        expect(pixelToBinCenter(399, 400, HIST)).toBe(3.5)
    })

    it('clicks outside the plot are ignored', () => {
        expect(pixelToBinCenter(-3, 400, HIST)).toBeNull()
        expect(pixelToBinCenter(400, 400, HIST)).toBeNull()
        expect(pixelToBinCenter(10, 0, HIST)).toBeNull()
    })

    it('click resolution equals the server bin width', () => {
        const wide = { edges: [0, 0.5, 1.0], counts: [1, 1] }
        expect(pixelToBinCenter(60, 200, wide)).toBe(0.25)
        expect(pixelToBinCenter(140, 200, wide)).toBe(0.75)
    })
})

describe('overlay scaling', () => {
    const component: ComponentJson = { median: 2, lambda: 0.5, beta: 0.4, deleted: false }

    it('laplace density peaks at 1/(2*lambda)', () => {
        expect(laplaceDensity(2, 2, 0.5)).toBeCloseTo(1.0, 12)
        expect(laplaceDensity(2.5, 2, 0.5)).toBeCloseTo(Math.exp(-1), 12)
    })

    it('curve height is density scaled by beta * N * binwidth', () => {
        // N=600, binwidth 0.25: peak = 1.0 * 0.4 * 600 * 0.25
        expect(overlayHeight(2, component, 600, 0.25)).toBeCloseTo(60, 9)
    })

    it('peak sits at the component median', () => {
        const at = (x: number) => overlayHeight(x, component, 600, 0.25)
        expect(at(2)).toBeGreaterThan(at(1.8))
        expect(at(2)).toBeGreaterThan(at(2.2))
    })

    it('deleted components draw nothing', () => {
        expect(overlayHeight(2, { ...component, deleted: true }, 600, 0.25)).toBe(0)
        expect(overlayHeight(2, { ...component, lambda: 0 }, 600, 0.25)).toBe(0)
    })
})
